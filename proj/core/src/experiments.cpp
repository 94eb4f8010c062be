#include "nudg/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nudg/csv.hpp"
#include "nudg/error.hpp"
#include "nudg/linalg.hpp"
#include "nudg/rng.hpp"

namespace nudg {

namespace {

double binomial_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)); }

}  // namespace

void Synthetic2dConfig::validate() const {
  Synthetic2dSpec{flip_prob, Domain::kId, n_train, seed}.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
  if (n_train < 1) throw ValidationError("n_train must be >= 1");
  if (n_eval < 1) throw ValidationError("n_eval must be >= 1");
  if (hidden < 1) throw ValidationError("hidden must be >= 1");
  if (resolution < 50) throw ValidationError("resolution must be >= 50");
  train.validate();
}

Synthetic2dData make_synthetic2d_data(const Synthetic2dConfig& config) {
  config.validate();
  auto spec = [&](Domain domain, std::size_t n, std::string_view purpose) {
    return Synthetic2dSpec{config.flip_prob, domain, n, rng::derive_seed(config.seed, purpose)};
  };
  return {sample_synthetic2d(spec(Domain::kId, config.n_train, "synth2d/train")),
          sample_synthetic2d(spec(Domain::kId, config.n_eval, "synth2d/eval-id")),
          sample_synthetic2d(spec(Domain::kOod, config.n_eval, "synth2d/eval-ood"))};
}

LinearModel synthetic2d_init(const Synthetic2dConfig& config) {
  return random_linear_model(config.hidden, 2, rng::derive_seed(config.seed, "synth2d/init"));
}

TrainResult train_synthetic2d(const Synthetic2dData& data, const Synthetic2dConfig& config, const Objective& objective) {
  return train(synthetic2d_init(config), data.train, objective, config.train);
}

LinearModel oracle_x1_model() { return LinearModel{Matrix{{1.0, 0.0}}, {1.0}}; }

ComparisonResult run_synthetic2d_comparison(const Synthetic2dConfig& config) {
  const Synthetic2dData data = make_synthetic2d_data(config);
  const std::size_t n = config.n_eval;
  auto row = [&](const Model& model, std::string name, std::size_t steps, bool converged) {
    ComparisonRow r;
    r.objective = std::move(name);
    r.id_accuracy = accuracy(model, data.eval_id);
    r.ood_accuracy = accuracy(model, data.eval_ood);
    r.id_se = binomial_se(r.id_accuracy, n);
    r.ood_se = binomial_se(r.ood_accuracy, n);
    r.steps = steps;
    r.converged = converged;
    return r;
  };
  const Objective erm = Objective::erm();
  const Objective nu = Objective::nuclear(config.lambda);
  const TrainResult erm_run = train_synthetic2d(data, config, erm);
  const TrainResult nu_run = train_synthetic2d(data, config, nu);
  ComparisonResult out{{}, erm_run.model, nu_run.model};
  out.rows.push_back(row(erm_run.model, erm.name(), erm_run.steps, erm_run.converged));
  out.rows.push_back(row(nu_run.model, nu.name(), nu_run.steps, nu_run.converged));
  out.rows.push_back(row(oracle_x1_model(), "oracle-x1", 0, true));
  return out;
}

std::string comparison_csv(const ComparisonResult& result, double lambda) {
  std::ostringstream out;
  out << "objective,lambda,id_accuracy,ood_accuracy,id_se,ood_se,steps,converged\n";
  for (const auto& r : result.rows) {
    const double l = r.objective == "ERM-NU" ? lambda : 0.0;
    out << r.objective << ',' << csv::number(l) << ',' << csv::number(r.id_accuracy) << ','
        << csv::number(r.ood_accuracy) << ',' << csv::number(r.id_se) << ',' << csv::number(r.ood_se) << ','
        << r.steps << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<double> default_lambda_grid() {
  return {0.0, 1e-3, std::pow(10.0, -2.5), 1e-2, std::pow(10.0, -1.5), 1e-1};
}

SweepRecord evaluate_sweep_point(const Model& model, double lambda, const Synthetic2dData& data) {
  SweepRecord r;
  r.lambda = lambda;
  r.id_accuracy = accuracy(model, data.eval_id);
  r.ood_accuracy = accuracy(model, data.eval_ood);
  const Matrix features = forward(model, data.eval_ood).features;
  const std::vector<double> sigma = singular_values(features);
  double fro = 0.0;
  for (double s : sigma) {
    r.nuclear_norm += s;
    fro += s * s;
  }
  if (!(sigma.front() > 0.0)) throw NumericalError("OOD features collapsed to zero; stable rank undefined");
  r.stable_rank = fro / (sigma.front() * sigma.front());
  return r;
}

SweepResult run_lambda_sweep(std::span<const double> lambdas, const Synthetic2dConfig& config) {
  if (lambdas.empty()) throw ValidationError("lambda grid is empty");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0) || !std::isfinite(lambdas[k])) throw ValidationError("lambda values must be >= 0");
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) throw ValidationError("lambda values must be strictly increasing");
  }
  const Synthetic2dData data = make_synthetic2d_data(config);
  SweepResult out;
  out.config = config;
  for (double lambda : lambdas) {
    try {
      const TrainResult run = train_synthetic2d(data, config, Objective::nuclear(lambda));
      SweepRecord r = evaluate_sweep_point(run.model, lambda, data);
      r.steps = run.steps;
      r.converged = run.converged;
      out.records.push_back(r);
    } catch (const NumericalError& e) {
      out.complete = false;
      out.failure = "lambda " + csv::number(lambda) + ": " + e.what();
      break;
    }
  }
  return out;
}

std::string sweep_row_csv(const SweepRecord& r) {
  std::ostringstream out;
  out << csv::number(r.lambda) << ',' << csv::number(r.id_accuracy) << ',' << csv::number(r.ood_accuracy) << ','
      << csv::number(r.stable_rank) << ',' << csv::number(r.nuclear_norm) << ',' << r.steps << ','
      << (r.converged ? 1 : 0) << '\n';
  return out.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "lambda,id_accuracy,ood_accuracy,stable_rank,nuclear_norm,steps,converged\n";
  for (const auto& r : result.records) out += sweep_row_csv(r);
  return out;
}

std::string sweep_svg(const SweepResult& result) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 70, kTop = 30, kBottom = 60;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  const auto& recs = result.records;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!recs.empty()) {
    // Points are spaced evenly by grid index; labels carry the lambda values.
    auto x = [&](std::size_t k) {
      return recs.size() == 1 ? kLeft + pw / 2 : kLeft + pw * static_cast<double>(k) / static_cast<double>(recs.size() - 1);
    };
    double sr_lo = recs.front().stable_rank, sr_hi = sr_lo;
    for (const auto& r : recs) {
      sr_lo = std::min(sr_lo, r.stable_rank);
      sr_hi = std::max(sr_hi, r.stable_rank);
    }
    if (sr_hi - sr_lo < 1e-12) sr_hi = sr_lo + 1e-12;
    auto y_sr = [&](double v) { return kTop + ph * (1.0 - (v - sr_lo) / (sr_hi - sr_lo)); };
    auto y_acc = [&](double v) { return kTop + ph * (1.0 - v); };
    auto polyline = [&](const char* color, auto&& y, auto&& get) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < recs.size(); ++k) s << x(k) << ',' << y(get(recs[k])) << ' ';
      s << "\"/>\n";
      for (std::size_t k = 0; k < recs.size(); ++k) {
        s << "<circle cx=\"" << x(k) << "\" cy=\"" << y(get(recs[k])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    };
    polyline("#1f77b4", y_sr, [](const SweepRecord& r) { return r.stable_rank; });
    polyline("#d62728", y_acc, [](const SweepRecord& r) { return r.ood_accuracy; });
    for (std::size_t k = 0; k < recs.size(); ++k) {
      s << "<text x=\"" << x(k) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
        << csv::number(recs[k].lambda).substr(0, 7) << "</text>\n";
    }
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">"
      << csv::number(sr_hi).substr(0, 6) << "</text>\n";
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">"
      << csv::number(sr_lo).substr(0, 6) << "</text>\n";
    s << "<text x=\"" << kLeft + pw + 8 << "\" y=\"" << kTop + 4 << "\">1</text>\n";
    s << "<text x=\"" << kLeft + pw + 8 << "\" y=\"" << kTop + ph << "\">0</text>\n";
  }
  s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">lambda</text>\n";
  s << "<text x=\"15\" y=\"" << kTop + ph / 2 << "\" fill=\"#1f77b4\" transform=\"rotate(-90 15 " << kTop + ph / 2
    << ")\" text-anchor=\"middle\">stable rank (OOD features)</text>\n";
  s << "<text x=\"" << kW - 15 << "\" y=\"" << kTop + ph / 2 << "\" fill=\"#d62728\" transform=\"rotate(90 "
    << kW - 15 << ' ' << kTop + ph / 2 << ")\" text-anchor=\"middle\">OOD accuracy</text>\n";
  s << "</svg>\n";
  return s.str();
}

double BoundaryGrid::center(std::size_t k) const noexcept {
  return lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(resolution);
}

BoundaryGrid export_boundary_grid(const Model& model, std::size_t resolution) {
  if (input_dim(model) != 2) throw ValidationError("boundary grid needs a model with 2-D inputs");
  if (resolution < 50) throw ValidationError("boundary grid resolution must be >= 50");
  BoundaryGrid g;
  g.resolution = resolution;
  g.labels.resize(resolution * resolution);
  for (std::size_t row = 0; row < resolution; ++row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      const std::array<double, 2> x{g.center(col), g.center(row)};
      g.labels[row * resolution + col] = predict_label(output(model, x));
    }
  }
  return g;
}

std::string boundary_csv(const BoundaryGrid& grid) {
  std::ostringstream out;
  out << "x1,x2,label\n";
  for (std::size_t row = 0; row < grid.resolution; ++row) {
    for (std::size_t col = 0; col < grid.resolution; ++col) {
      out << csv::number(grid.center(col)) << ',' << csv::number(grid.center(row)) << ',' << grid.at(row, col)
          << '\n';
    }
  }
  return out.str();
}

double boundary_angle_from_vertical(const LinearModel& model) {
  if (model.feature_map.cols() != 2) throw ValidationError("boundary angle needs a model with 2-D inputs");
  // Output is v . x with v = A^T head; the boundary is vertical when v is
  // parallel to the x1 axis.
  double v1 = 0.0;
  double v2 = 0.0;
  for (std::size_t k = 0; k < model.feature_map.rows(); ++k) {
    v1 += model.head[k] * model.feature_map(k, 0);
    v2 += model.head[k] * model.feature_map(k, 1);
  }
  return std::atan2(std::abs(v2), std::abs(v1)) * 180.0 / std::numbers::pi;
}

}  // namespace nudg
