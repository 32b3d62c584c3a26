#include "maxcon/models/factory.h"

namespace maxcon {

std::size_t ProblemData::size() const {
    switch (family) {
    case Family::regression:
        return regression.size();
    case Family::homography:
    case Family::fundamental:
        return correspondences.size();
    case Family::triangulation:
        return views.size();
    }
    return 0;
}

double default_epsilon(Family family) {
    switch (family) {
    case Family::regression:
        return 0.3;
    case Family::homography:
        return 4.0;
    case Family::triangulation:
        return 1.0;
    case Family::fundamental:
        return 0.006;
    }
    return 0.0;
}

std::unique_ptr<ModelEstimator> make_estimator(const ProblemData &data) {
    switch (data.family) {
    case Family::regression:
        return std::make_unique<RegressionProblem>(data.regression, data.epsilon);
    case Family::homography:
        return std::make_unique<HomographyProblem>(data.correspondences, data.epsilon);
    case Family::triangulation:
        return std::make_unique<TriangulationProblem>(data.views, data.epsilon);
    case Family::fundamental:
        return std::make_unique<FundamentalProblem>(data.correspondences, data.epsilon);
    }
    return nullptr;
}

}  // namespace maxcon
