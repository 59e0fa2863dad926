#pragma once

#include "commetric/belonging.hpp"
#include "commetric/cover.hpp"
#include "commetric/detector.hpp"
#include "commetric/errors.hpp"
#include "commetric/graph.hpp"
#include "commetric/harness.hpp"
#include "commetric/metrics.hpp"
