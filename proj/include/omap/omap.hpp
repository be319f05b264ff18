#ifndef OMAP_OMAP_HPP_
#define OMAP_OMAP_HPP_

#include "omap/error.hpp"
#include "omap/evaluator.hpp"
#include "omap/matrix.hpp"
#include "omap/metrics.hpp"
#include "omap/obce.hpp"
#include "omap/ontology.hpp"
#include "omap/parallel.hpp"
#include "omap/report.hpp"
#include "omap/tensor_io.hpp"

#endif  // OMAP_OMAP_HPP_
