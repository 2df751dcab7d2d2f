#include "hklapse/state.hpp"

namespace hklapse {

void validate(const OpinionState& s) {
  require(s.x.cols() >= 2, "opinion state needs N >= 2 agents");
  require(s.x.rows() >= 1, "opinion state needs dimension d >= 1");
  require(s.x.allFinite(), "opinion state has non-finite components");
}

double compute_M0(const Mat& x0) {
  require(x0.size() > 0, "empty initial state");
  require(x0.allFinite(), "non-finite initial state");
  return x0.colwise().norm().maxCoeff();
}

double compute_M0(std::span<const Mat> history_states) {
  require(!history_states.empty(), "empty history");
  double m = 0.0;
  for (const Mat& x : history_states) m = std::max(m, compute_M0(x));
  return m;
}

}  // namespace hklapse
