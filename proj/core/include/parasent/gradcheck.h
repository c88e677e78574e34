#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parasent/encoders.h"

namespace parasent {

// A scalar objective plus the arguments of every non-differentiable point it
// passes through (hinge arguments, |·| inputs). Coordinates whose
// perturbation lands near or across one of those are not scored.
struct Evaluation {
  long double value = 0.0L;
  std::vector<double> kinks;
};

using ObjectiveFn = std::function<Evaluation(const ParameterSet<double>&)>;
using GradientFn =
    std::function<ParameterSet<double>(const ParameterSet<double>&)>;

struct FdOptions {
  double step = 1e-5;
  double kink_tolerance = 1e-6;
  // Coordinates checked per call; 0 checks all. When the model is larger a
  // seeded subsample of this size is used.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 1;
};

// |a − n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

struct TensorReport {
  std::string name;
  double max_rel = 0.0;
  std::size_t worst = 0;  // flat index within the tensor
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
};

struct GradReport {
  std::vector<TensorReport> tensors;
  double max_rel = 0.0;
  std::string worst_tensor;
  std::size_t worst_coordinate = 0;  // flat index over the whole set
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;

  bool passed(double tolerance = 1e-4) const {
    return max_rel < tolerance;
  }
  // Folds another report in (used when certifying many instances).
  void merge(const GradReport& other);
};

// Central differences against the supplied analytic gradient.
GradReport fd_check(const ObjectiveFn& objective,
                    const ParameterSet<double>& params,
                    const ParameterSet<double>& analytic,
                    const FdOptions& options = {});

void write_grad_report(std::ostream& out, const GradReport& report);

enum class LossKind { Margin, Kl };

std::string to_string(LossKind kind);

// Randomly generated small problem in double precision: a vocabulary of a
// dozen rows, 2 to 4 pairs of 1 to 6 tokens, nonzero λ_c / λ_w with
// perturbed anchors, and (on some seeds) embedding dropout whose masks are
// re-drawn from the same seed on every evaluation. Margin negatives are
// selected once at the base point and held fixed.
struct GradInstance {
  std::string description;
  ParameterSet<double> params;
  ObjectiveFn objective;
  GradientFn gradient;
};

GradInstance make_instance(const EncoderConfig& encoder, LossKind loss,
                           std::size_t dim, std::uint64_t seed);

// make_instance + fd_check.
GradReport check_instance(const EncoderConfig& encoder, LossKind loss,
                          std::size_t dim, std::uint64_t seed,
                          const FdOptions& options = {});

}  // namespace parasent
