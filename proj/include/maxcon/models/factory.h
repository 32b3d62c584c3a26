#ifndef MAXCON_MODELS_FACTORY_H_
#define MAXCON_MODELS_FACTORY_H_

#include "maxcon/models/estimator.h"
#include "maxcon/models/fundamental.h"
#include "maxcon/models/homography.h"
#include "maxcon/models/regression.h"
#include "maxcon/models/triangulation.h"

#include <memory>
#include <vector>

namespace maxcon {

/// Raw inputs of one fitting problem. Only the list matching `family` is used.
struct ProblemData {
    Family family = Family::regression;
    double epsilon = 0.0;
    std::vector<RegressionDatum> regression;
    std::vector<Correspondence> correspondences;  // homography, fundamental
    std::vector<ViewObservation> views;           // triangulation

    std::size_t size() const;
};

/// Threshold used when none is given: 0.3, 4 px, 1 px and 0.006.
double default_epsilon(Family family);

std::unique_ptr<ModelEstimator> make_estimator(const ProblemData &data);

}  // namespace maxcon

#endif  // MAXCON_MODELS_FACTORY_H_
