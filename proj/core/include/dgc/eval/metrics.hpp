#pragma once

#include <map>
#include <optional>
#include <vector>

#include "dgc/geometry/correspondence.hpp"

namespace dgc::eval {

using geometry::CorrespondenceMap;
using geometry::MatchabilityMask;

inline const std::vector<double> kDefaultPckThresholds{1.0, 3.0, 5.0};

// Pixel-space endpoint error of every pixel (normalized error scaled by
// (W-1)/2 and (H-1)/2).
std::vector<double> endpoint_errors(const CorrespondenceMap& est, const CorrespondenceMap& gt);

// Mean endpoint error over mask-true pixels. Throws DataError on an empty mask.
double aepe(const CorrespondenceMap& est, const CorrespondenceMap& gt,
            const MatchabilityMask& mask);

// Fraction of mask-true pixels with endpoint error <= t, per threshold t > 0.
std::map<double, double> pck(const CorrespondenceMap& est, const CorrespondenceMap& gt,
                             const MatchabilityMask& mask,
                             const std::vector<double>& thresholds = kDefaultPckThresholds);

// Intersection over union; 1 when both masks are empty.
double jaccard(const MatchabilityMask& pred, const MatchabilityMask& gt);

struct EvalReport {
  double aepe = 0.0;
  std::map<double, double> pck;
  std::optional<double> jaccard;
  std::size_t n_valid = 0;
};

// `mask` selects the evaluated pixels (the ground-truth mask, or an all-true
// mask for unmasked evaluation).
EvalReport evaluate(const CorrespondenceMap& est, const CorrespondenceMap& gt,
                    const MatchabilityMask& mask,
                    const std::vector<double>& thresholds = kDefaultPckThresholds);

// Pixel-weighted aggregate of per-pair reports: AEPE and PCK are pooled over
// all valid pixels, Jaccard averaged over the pairs that have one.
EvalReport aggregate(const std::vector<EvalReport>& reports);

}  // namespace dgc::eval
