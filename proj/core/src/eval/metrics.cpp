#include "dgc/eval/metrics.hpp"

#include <cmath>
#include <numeric>

#include "dgc/error.hpp"

namespace dgc::eval {

namespace {

void check_same_size(const CorrespondenceMap& a, const CorrespondenceMap& b,
                     const MatchabilityMask& m) {
  if (a.width != b.width || a.height != b.height || m.width != a.width || m.height != a.height) {
    throw ShapeError("metrics: resolution mismatch");
  }
}

}  // namespace

std::vector<double> endpoint_errors(const CorrespondenceMap& est, const CorrespondenceMap& gt) {
  if (est.width != gt.width || est.height != gt.height) {
    throw ShapeError("metrics: resolution mismatch");
  }
  const double sx = 0.5 * (est.width - 1), sy = 0.5 * (est.height - 1);
  std::vector<double> err(static_cast<std::size_t>(est.width) * est.height);
  for (std::size_t p = 0; p < err.size(); ++p) {
    const double du = (static_cast<double>(est.uv[2 * p]) - gt.uv[2 * p]) * sx;
    const double dv = (static_cast<double>(est.uv[2 * p + 1]) - gt.uv[2 * p + 1]) * sy;
    err[p] = std::hypot(du, dv);
  }
  return err;
}

double aepe(const CorrespondenceMap& est, const CorrespondenceMap& gt,
            const MatchabilityMask& mask) {
  return evaluate(est, gt, mask, {}).aepe;
}

std::map<double, double> pck(const CorrespondenceMap& est, const CorrespondenceMap& gt,
                             const MatchabilityMask& mask, const std::vector<double>& thresholds) {
  return evaluate(est, gt, mask, thresholds).pck;
}

double jaccard(const MatchabilityMask& pred, const MatchabilityMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeError("jaccard: resolution mismatch");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t p = 0; p < pred.valid.size(); ++p) {
    inter += pred.valid[p] && gt.valid[p];
    uni += pred.valid[p] || gt.valid[p];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport evaluate(const CorrespondenceMap& est, const CorrespondenceMap& gt,
                    const MatchabilityMask& mask, const std::vector<double>& thresholds) {
  check_same_size(est, gt, mask);
  for (double t : thresholds) {
    if (!(t > 0.0)) throw UsageError("pck: thresholds must be positive");
  }
  const auto err = endpoint_errors(est, gt);
  EvalReport r;
  double total = 0.0;
  std::vector<std::size_t> hits(thresholds.size(), 0);
  for (std::size_t p = 0; p < err.size(); ++p) {
    if (!mask.valid[p]) continue;
    ++r.n_valid;
    total += err[p];
    for (std::size_t k = 0; k < thresholds.size(); ++k) hits[k] += err[p] <= thresholds[k];
  }
  if (r.n_valid == 0) throw DataError("metrics: empty mask");
  r.aepe = total / static_cast<double>(r.n_valid);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    r.pck[thresholds[k]] = static_cast<double>(hits[k]) / static_cast<double>(r.n_valid);
  }
  return r;
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
  EvalReport out;
  double aepe_sum = 0.0, jac_sum = 0.0;
  std::size_t jac_n = 0;
  std::map<double, double> pck_sum;
  for (const auto& r : reports) {
    out.n_valid += r.n_valid;
    aepe_sum += r.aepe * static_cast<double>(r.n_valid);
    for (const auto& [t, v] : r.pck) pck_sum[t] += v * static_cast<double>(r.n_valid);
    if (r.jaccard) {
      jac_sum += *r.jaccard;
      ++jac_n;
    }
  }
  if (out.n_valid > 0) {
    out.aepe = aepe_sum / static_cast<double>(out.n_valid);
    for (const auto& [t, v] : pck_sum) out.pck[t] = v / static_cast<double>(out.n_valid);
  }
  if (jac_n) out.jaccard = jac_sum / static_cast<double>(jac_n);
  return out;
}

}  // namespace dgc::eval
