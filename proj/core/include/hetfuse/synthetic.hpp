#pragma once

// Synthetic dual-modality cohorts with planted community structure.
//
// ROIs are split into contiguous communities. Each community has a latent
// time course, partly shared by every subject of the cohort (weight
// common_drive) and partly subject-specific; an ROI's fMRI series is its
// community's course plus noise, and
// fiber counts are Poisson with a high rate inside communities and a low rate
// between them. Patients (label 1) differ from controls by `contrast`:
//   - the course of community 1 is mixed with that of community 0
//     (strength contrast * coupling_delta),
//   - round(contrast * shifted_rois) ROIs move from community 0 to community 1,
//   - fiber rate between communities 0 and 1 rises by contrast * sc_boost,
//   - radiomic features of community-0 ROIs shift by contrast * feature_shift.
// With contrast 0 both classes are drawn from the same distribution.

#include <cstdint>
#include <vector>

#include "hetfuse/graphbuild.hpp"

namespace hetfuse {

struct SyntheticSpec {
  int n_control = 20;
  int n_patient = 20;
  int n_rois = 16;
  int n_communities = 4;
  int series_length = 64;
  int feature_width = 8;
  double contrast = 1.0;
  double coupling_delta = 0.8;
  int shifted_rois = 2;
  double sc_boost = 12.0;
  double feature_shift = 2.0;
  double noise = 0.6;
  double common_drive = 0.8;  // fraction of course variance shared across subjects
  double within_rate = 20.0;
  double between_rate = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Planted community of each ROI for the given class (after the membership
// shift applied to patients).
std::vector<int> planted_communities(const SyntheticSpec& spec, int label);

// Controls first (ids "ctl000", ...), then patients ("pat000", ...).
std::vector<SubjectRaw> generate_synthetic(const SyntheticSpec& spec);

}  // namespace hetfuse
