#include "parasent/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>

#include "parasent/regularize.h"
#include "parasent/supervised.h"
#include "parasent/transfer.h"

namespace parasent {

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

void GradReport::merge(const GradReport& other) {
  checked += other.checked;
  excluded += other.excluded;
  if (other.max_rel > max_rel || tensors.empty()) {
    max_rel = other.max_rel;
    worst_tensor = other.worst_tensor;
    worst_coordinate = other.worst_coordinate;
    analytic = other.analytic;
    numeric = other.numeric;
  }
  for (const auto& t : other.tensors) {
    auto it = std::find_if(tensors.begin(), tensors.end(),
                           [&](const auto& x) { return x.name == t.name; });
    if (it == tensors.end()) {
      tensors.push_back(t);
      continue;
    }
    it->checked += t.checked;
    it->excluded += t.excluded;
    if (t.max_rel > it->max_rel) {
      it->max_rel = t.max_rel;
      it->worst = t.worst;
      it->analytic = t.analytic;
      it->numeric = t.numeric;
    }
  }
}

namespace {

bool near_kink(const std::vector<double>& base, const std::vector<double>& plus,
               const std::vector<double>& minus, double tol) {
  for (double k : base) {
    if (std::abs(k) <= tol) return true;
  }
  // A kink can move with the perturbation; compare signs pairwise when the
  // structure did not change.
  if (plus.size() == minus.size()) {
    for (std::size_t i = 0; i < plus.size(); ++i) {
      if ((plus[i] > 0.0) != (minus[i] > 0.0)) return true;
      if (i < base.size() && (plus[i] > 0.0) != (base[i] > 0.0)) return true;
    }
  } else {
    return true;
  }
  return false;
}

}  // namespace

GradReport fd_check(const ObjectiveFn& objective,
                    const ParameterSet<double>& params,
                    const ParameterSet<double>& analytic,
                    const FdOptions& options) {
  if (!params.same_layout(analytic)) {
    throw DimensionError("fd_check: gradient layout differs from parameters");
  }
  const std::size_t total = params.total_size();
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), 0);
  if (options.max_coordinates > 0 && total > options.max_coordinates) {
    Rng rng(options.seed);
    const auto perm = seeded_permutation(total, rng);
    coords.assign(perm.begin(),
                  perm.begin() + static_cast<std::ptrdiff_t>(options.max_coordinates));
    std::sort(coords.begin(), coords.end());
  }

  const auto base = objective(params);
  const auto flat_grad = analytic.flatten();

  GradReport report;
  for (std::size_t t = 0; t < params.count(); ++t) {
    report.tensors.push_back({params.name(t)});
  }
  bool any = false;
  auto theta = params;
  for (std::size_t k : coords) {
    const auto [tensor, offset] = params.locate(k);
    auto& slot = theta[tensor].data()[offset];
    const double original = slot;
    const double up = original + options.step;
    const double down = original - options.step;
    slot = up;
    const auto plus = objective(theta);
    slot = down;
    const auto minus = objective(theta);
    slot = original;

    auto& tr = report.tensors[tensor];
    if (near_kink(base.kinks, plus.kinks, minus.kinks,
                  options.kink_tolerance)) {
      ++tr.excluded;
      ++report.excluded;
      continue;
    }
    // Divide by the step actually taken after rounding θ ± h.
    const double numeric = static_cast<double>(
        (plus.value - minus.value) / static_cast<long double>(up - down));
    const double a = flat_grad[k];
    const double rel = relative_error(a, numeric);
    ++tr.checked;
    ++report.checked;
    if (tr.checked == 1 || rel > tr.max_rel) {
      tr.max_rel = rel;
      tr.worst = offset;
      tr.analytic = a;
      tr.numeric = numeric;
    }
    if (!any || rel > report.max_rel) {
      any = true;
      report.max_rel = rel;
      report.worst_tensor = params.name(tensor);
      report.worst_coordinate = k;
      report.analytic = a;
      report.numeric = numeric;
    }
  }
  return report;
}

void write_grad_report(std::ostream& out, const GradReport& report) {
  std::size_t width = 6;
  for (const auto& t : report.tensors) width = std::max(width, t.name.size());
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::left << std::setw(static_cast<int>(width)) << "tensor"
      << std::right << std::setw(12) << "max_rel" << std::setw(8) << "worst"
      << std::setw(16) << "analytic" << std::setw(16) << "numeric"
      << std::setw(9) << "checked" << std::setw(9) << "kinks" << '\n';
  for (const auto& t : report.tensors) {
    out << std::left << std::setw(static_cast<int>(width)) << t.name
        << std::right << std::scientific << std::setprecision(3)
        << std::setw(12) << t.max_rel << std::setw(8) << t.worst
        << std::setprecision(6) << std::setw(16) << t.analytic
        << std::setw(16) << t.numeric << std::setw(9) << t.checked
        << std::setw(9) << t.excluded << '\n';
  }
  out << std::scientific << std::setprecision(3) << "max relative error "
      << report.max_rel << " at " << report.worst_tensor << " (coordinate "
      << report.worst_coordinate << "); checked " << report.checked
      << ", excluded " << report.excluded << '\n';
  out.flags(flags);
  out.precision(prec);
}

std::string to_string(LossKind kind) {
  return kind == LossKind::Margin ? "margin" : "kl";
}

namespace {

constexpr std::size_t kVocab = 12;

TokenSequence random_sequence(Rng& rng) {
  TokenSequence s;
  const auto len = 1 + rng.bounded(6);
  for (std::size_t i = 0; i < len; ++i) {
    s.ids.push_back(static_cast<std::uint32_t>(rng.bounded(kVocab)));
  }
  return s;
}

void perturb(ParameterSet<double>& ps, Rng& rng, double scale) {
  for (std::size_t t = 0; t < ps.count(); ++t) {
    for (auto& v : ps[t].data()) v += scale * rng.normal();
  }
}

struct Problem {
  Encoder encoder;
  LossKind loss;
  std::vector<SentencePair> pairs;
  std::vector<ScoredPair> scored;
  std::vector<Negatives> negatives;
  Penalty penalty;
  ParameterSet<double> comp_anchor;
  Matrix<double> emb_anchor;
  double dropout = 0.0;
  std::uint64_t mask_seed = 0;
  double margin = 0.4;

  template <class T>
  struct Graph {
    Tape<T> tape;
    typename Tape<T>::NodeId loss = 0;
    std::vector<double> kinks;
  };

  Anchors<double> anchors() const { return {&comp_anchor, &emb_anchor}; }

  // Encodes every sentence on a fresh tape with masks from a fixed seed.
  template <class T>
  void encode(Tape<T>& tape, const EncoderLayout& lay,
              std::vector<typename Tape<T>::NodeId>& left,
              std::vector<typename Tape<T>::NodeId>& right) const {
    Rng masks(mask_seed);
    Rng* mrng = dropout > 0.0 ? &masks : nullptr;
    const bool margin_loss = loss == LossKind::Margin;
    const auto n = margin_loss ? pairs.size() : scored.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = margin_loss ? pairs[i].first : scored[i].first;
      const auto& b = margin_loss ? pairs[i].second : scored[i].second;
      left.push_back(encoder.build(tape, lay, a, mrng, dropout));
      right.push_back(encoder.build(tape, lay, b, mrng, dropout));
    }
  }

  template <class T>
  std::unique_ptr<Graph<T>> build(const ParameterSet<T>& ps) const {
    auto g = std::unique_ptr<Graph<T>>(new Graph<T>{Tape<T>(ps)});
    const auto lay = encoder.layout(ps);
    std::vector<typename Tape<T>::NodeId> left, right;
    encode(g->tape, lay, left, right);
    if (loss == LossKind::Margin) {
      auto m = add_margin_terms<T>(g->tape, left, right, negatives, margin);
      g->loss = m.loss;
      g->kinks.assign(m.kinks.begin(), m.kinks.end());
    } else {
      auto k = add_kl_terms<T>(g->tape, head_layout(ps), left, right, scored);
      g->loss = k.loss;
      g->kinks.assign(k.kinks.begin(), k.kinks.end());
    }
    return g;
  }

  // The regulariser written out directly, in extended precision.
  long double penalty_extended(const ParameterSet<long double>& ps) const {
    long double total = 0.0L;
    for (std::size_t t = 0; t < ps.count(); ++t) {
      const bool words = ps.name(t) == kWordEmbeddings;
      const long double lambda = words ? penalty.lambda_w : penalty.lambda_c;
      const auto& anchor = words ? emb_anchor : comp_anchor[ps.name(t)];
      const auto& v = ps[t].data();
      for (std::size_t k = 0; k < v.size(); ++k) {
        const long double diff = v[k] - static_cast<long double>(anchor.data()[k]);
        total += lambda * diff * diff;
      }
    }
    return total;
  }
};

}  // namespace

GradInstance make_instance(const EncoderConfig& config, LossKind loss,
                           std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("gradcheck dimension must be positive");
  Rng rng(seed);
  auto problem = std::make_shared<Problem>(
      Problem{Encoder(config, dim), loss});
  const auto& encoder = problem->encoder;

  ParameterSet<double> params;
  Matrix<double> ww(kVocab, dim);
  for (auto& v : ww.data()) v = rng.uniform(-1.0, 1.0);
  params.add(std::string(kWordEmbeddings), ww);
  // Wider init than training uses, so gates sit away from saturation and
  // every path carries gradient.
  encoder.add_parameters(params, rng);
  for (std::size_t t = 0; t < params.count(); ++t) {
    if (params.name(t) == kWordEmbeddings) continue;
    for (auto& v : params[t].data()) v += 0.3 * rng.normal();
  }

  const auto batch = 2 + rng.bounded(3);
  if (loss == LossKind::Margin) {
    for (std::size_t i = 0; i < batch; ++i) {
      problem->pairs.push_back({random_sequence(rng), random_sequence(rng)});
    }
  } else {
    HeadConfig head{1 + rng.bounded(6), 5};
    add_head_parameters(params, encoder.output_dim(), head, rng);
    for (std::size_t i = 0; i < batch; ++i) {
      problem->scored.push_back(
          {random_sequence(rng), random_sequence(rng), rng.uniform(1.0, 5.0)});
    }
  }

  problem->penalty = {rng.uniform(1e-3, 1e-1), rng.uniform(1e-3, 1e-1)};
  problem->comp_anchor = params;
  perturb(problem->comp_anchor, rng, 0.05);
  problem->emb_anchor = ww;
  for (auto& v : problem->emb_anchor.data()) v += 0.05 * rng.normal();
  if (rng.bernoulli(0.5)) problem->dropout = 0.25;
  problem->mask_seed = rng.next_u64();

  if (loss == LossKind::Margin) {
    // Negatives come from the same (masked) embeddings the loss sees.
    Tape<double> tape(params);
    const auto lay = encoder.layout(params);
    std::vector<Tape<double>::NodeId> left, right;
    problem->encode<double>(tape, lay, left, right);
    std::vector<Vec<double>> lv, rv;
    for (auto id : left) lv.push_back(tape.value(id));
    for (auto id : right) rv.push_back(tape.value(id));
    problem->negatives = select_negatives<double>(lv, rv);
  }

  GradInstance inst;
  inst.description = to_string(config.kind) +
                     (config.bidirectional ? " bi" : "") + " " +
                     to_string(loss) + " d=" + std::to_string(dim) +
                     " seed=" + std::to_string(seed);
  inst.params = std::move(params);
  // The oracle evaluates the same graph in extended precision: at h = 1e-5
  // a double-precision forward pass leaves ~1e-11 of rounding noise in the
  // difference quotient, which swamps gradient entries below ~1e-7.
  inst.objective = [problem](const ParameterSet<double>& ps) {
    const auto wide = ps.cast<long double>();
    const auto g = problem->build(wide);
    return Evaluation{g->tape.scalar(g->loss) + problem->penalty_extended(wide),
                      std::move(g->kinks)};
  };
  inst.gradient = [problem](const ParameterSet<double>& ps) {
    const auto g = problem->build<double>(ps);
    auto grads = ps.zeros_like();
    g->tape.backward(g->loss, grads);
    add_penalty_gradient(ps, problem->penalty, problem->anchors(), grads);
    return grads;
  };
  return inst;
}

GradReport check_instance(const EncoderConfig& encoder, LossKind loss,
                          std::size_t dim, std::uint64_t seed,
                          const FdOptions& options) {
  const auto inst = make_instance(encoder, loss, dim, seed);
  return fd_check(inst.objective, inst.params, inst.gradient(inst.params),
                  options);
}

}  // namespace parasent
