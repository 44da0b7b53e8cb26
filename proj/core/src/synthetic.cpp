#include "hetfuse/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "hetfuse/errors.hpp"
#include "hetfuse/seed.hpp"

namespace hetfuse {

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("synthetic spec: ") + what);
  };
  require(n_control >= 0 && n_patient >= 0 && n_control + n_patient > 0, "need at least one subject");
  require(n_communities >= 2, "need at least two communities");
  require(n_rois >= 2 * n_communities, "need at least two ROIs per community");
  require(series_length >= 8, "series-length must be >= 8");
  require(feature_width >= 1, "feature-width must be >= 1");
  require(contrast >= 0.0, "contrast must be nonnegative");
  require(noise > 0.0, "noise must be positive");
  require(common_drive >= 0.0 && common_drive <= 1.0, "common-drive must lie in [0, 1]");
  require(within_rate >= 0.0 && between_rate >= 0.0 && sc_boost >= 0.0, "rates must be nonnegative");
  require(shifted_rois >= 0 && shifted_rois < n_rois / n_communities, "shifted-rois must leave community 0 non-empty");
}

std::vector<int> planted_communities(const SyntheticSpec& spec, int label) {
  std::vector<int> comm(static_cast<std::size_t>(spec.n_rois));
  for (int i = 0; i < spec.n_rois; ++i) {
    comm[static_cast<std::size_t>(i)] = std::min(i * spec.n_communities / spec.n_rois, spec.n_communities - 1);
  }
  if (label == 1) {
    const int moved = static_cast<int>(std::lround(spec.contrast * spec.shifted_rois));
    // the last ROIs of community 0 join community 1
    int last0 = 0;
    while (last0 + 1 < spec.n_rois && comm[static_cast<std::size_t>(last0 + 1)] == 0) ++last0;
    for (int m = 0; m < moved && last0 - m > 0; ++m) comm[static_cast<std::size_t>(last0 - m)] = 1;
  }
  return comm;
}

namespace {

Matrix common_courses(const SyntheticSpec& spec) {
  std::mt19937_64 rng(mix_seed(spec.seed, 0xc0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(spec.n_communities, spec.series_length);
  for (Index k = 0; k < g.size(); ++k) g.data()[k] = gauss(rng);
  return g;
}

SubjectRaw make_subject(const SyntheticSpec& spec, const Matrix& common, int label, int index, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = spec.n_rois;
  const int t = spec.series_length;
  const std::vector<int> comm = planted_communities(spec, label);

  Matrix courses(spec.n_communities, t);
  for (Index k = 0; k < courses.size(); ++k) courses.data()[k] = gauss(rng);
  courses = std::sqrt(spec.common_drive) * common + std::sqrt(1.0 - spec.common_drive) * courses;
  if (label == 1) {
    const double delta = spec.contrast * spec.coupling_delta;
    courses.row(1) = (courses.row(1) + delta * courses.row(0)) / std::sqrt(1.0 + delta * delta);
  }

  SubjectRaw s;
  char id[32];
  std::snprintf(id, sizeof id, "%s%03d", label == 1 ? "pat" : "ctl", index);
  s.id = id;
  s.label = label;

  s.fmri_series.resize(n, t);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < t; ++c) {
      s.fmri_series(i, c) = courses(comm[static_cast<std::size_t>(i)], c) + spec.noise * gauss(rng);
    }
  }

  s.sc_counts = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int ci = comm[static_cast<std::size_t>(i)];
      const int cj = comm[static_cast<std::size_t>(j)];
      double rate = ci == cj ? spec.within_rate : spec.between_rate;
      if (label == 1 && std::min(ci, cj) == 0 && std::max(ci, cj) == 1) rate += spec.contrast * spec.sc_boost;
      std::poisson_distribution<int> fibers(rate);
      const double v = rate > 0.0 ? static_cast<double>(fibers(rng)) : 0.0;
      s.sc_counts(i, j) = v;
      s.sc_counts(j, i) = v;
    }
  }

  s.dti_features.resize(n, spec.feature_width);
  const std::vector<int> base = planted_communities(spec, 0);
  for (int i = 0; i < n; ++i) {
    const double shift =
        (label == 1 && base[static_cast<std::size_t>(i)] == 0) ? spec.contrast * spec.feature_shift : 0.0;
    for (int d = 0; d < spec.feature_width; ++d) s.dti_features(i, d) = gauss(rng) + shift;
  }
  return s;
}

}  // namespace

std::vector<SubjectRaw> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<SubjectRaw> out;
  out.reserve(static_cast<std::size_t>(spec.n_control + spec.n_patient));
  const Matrix common = common_courses(spec);
  for (int i = 0; i < spec.n_control; ++i) out.push_back(make_subject(spec, common, 0, i, mix_seed(spec.seed, 0, i)));
  for (int i = 0; i < spec.n_patient; ++i) out.push_back(make_subject(spec, common, 1, i, mix_seed(spec.seed, 1, i)));
  return out;
}

}  // namespace hetfuse
