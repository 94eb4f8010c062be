// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nudg/cli.hpp"
#include "nudg/experiments.hpp"
#include "nudg/linalg.hpp"
#include "nudg/models.hpp"
#include "nudg/rng.hpp"
#include "nudg/sampler.hpp"
#include "nudg/verifier.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace nudg;

namespace {

constexpr double kSigmas = 4.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

bool report_checks_pass(const VerificationReport& r, Outcome& o, const std::string& prefix = "") {
  bool ok = true;
  for (const auto& c : r.checks) {
    if (!prefix.empty() && c.name.rfind(prefix, 0) != 0) continue;
    const CheckStatus s = c.status();
    if (s != CheckStatus::kPass) {
      ok = false;
      o.require(false, c.name + "=" + fmt(c.measured) + " " + std::string(to_string(s)));
    }
  }
  return ok;
}

Outcome criterion1() {
  Outcome o;
  for (std::uint64_t seed : {0, 1, 2}) {
    Synthetic2dConfig c;
    c.seed = seed;
    const ComparisonResult r = run_synthetic2d_comparison(c);
    const ComparisonRow& erm = r.rows[0];
    const ComparisonRow& nu = r.rows[1];
    const std::string s = "seed " + std::to_string(seed) + ": ";
    o.require(erm.id_accuracy + kSigmas * erm.id_se >= 0.97, s + "ERM ID " + fmt(erm.id_accuracy) + " >= 0.97");
    o.require(erm.ood_accuracy + kSigmas * erm.ood_se >= 0.70 && erm.ood_accuracy - kSigmas * erm.ood_se <= 0.82,
              s + "ERM OOD " + fmt(erm.ood_accuracy) + " in [0.70, 0.82]");
    o.require(nu.ood_accuracy + kSigmas * nu.ood_se >= 0.90, s + "ERM-NU OOD " + fmt(nu.ood_accuracy) + " >= 0.90");
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const TheorySpec spec{.r = 49, .d = 300, .gamma = 0.45, .seed = 2024};
  const VerificationReport r = verify_proposition1(spec, 0.05, 10);
  report_checks_pass(r, o);
  const CheckRecord* rank = r.find("prop1/erm-rank-ood-accuracy");
  const CheckRecord* l2 = r.find("prop1/erm-l2-ood-accuracy-below-chance");
  const CheckRecord* ceiling = r.find("prop1/erm-l2-ood-accuracy-vs-exp-minus-r-over-10");
  if (!rank || !l2 || !ceiling) {
    o.require(false, "missing checks");
    return o;
  }
  o.require(rank->measured == 1.0 && rank->n >= 1'000'000,
            "ERM-rank OOD " + fmt(rank->measured) + " over " + std::to_string(rank->n));
  o.require(l2->measured < 0.5 - kSigmas * l2->std_error, "ERM-l2 OOD " + fmt(l2->measured) + " < 0.5 - 4se");
  o.detail += "; ceiling exp(-4.9) = " + fmt(ceiling->target) + " (" + std::string(to_string(ceiling->status())) + ")";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const VerificationReport r = verify_lemma1({.r = 49, .d = 300, .gamma = 0.45, .seed = 31}, 0.05);
  report_checks_pass(r, o);
  o.require(true, std::to_string(r.checks.size()) + " lemma1 checks");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const TheorySpec spec{.r = 4, .d = 8, .gamma = 0.4, .seed = 41};
  for (std::size_t b : {1, 2, 4}) {
    const VerificationReport r = verify_lemma2(spec, b);
    report_checks_pass(r, o);
    const std::string name = "lemma2/exhaustive-b" + std::to_string(b) + "/support-outside-R";
    const CheckRecord* c = r.find(name);
    o.require(c != nullptr && c->measured == 0.0, name);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  VerificationReport r = verify_loss_properties(51);
  r.append(verify_bounds_and_moments(
      {.r = 32, .d = 200, .gamma = 0.4, .n = 1'000'000, .seed = 52, .allow_out_of_regime = true}));
  report_checks_pass(r, o);
  o.require(r.count(CheckStatus::kOutOfRegime) == 0, std::to_string(r.checks.size()) + " checks at n = 1e6");
  return o;
}

Outcome criterion6() {
  Outcome o;
  rng::SplitMix64 gen(61);

  const std::vector<std::pair<std::size_t, std::size_t>> shapes{{2, 2}, {3, 5}, {5, 3}, {8, 8}, {20, 4}};
  for (const auto& [m, n] : shapes) {
    double worst = 0.0;
    bool ordered = true;
    for (int trial = 0; trial < 1000; ++trial) {
      const Matrix a = oracle::random_matrix(m, n, gen, trial % 2 ? 1.0 : 100.0);
      const SvdResult s = svd(a);
      const Matrix recon = s.u * Matrix::diagonal(s.sigma) * s.vt;
      worst = std::max(worst, oracle::frobenius(recon - a) / std::max(1.0, oracle::frobenius(a)));
      for (std::size_t k = 0; k + 1 < s.sigma.size(); ++k) ordered = ordered && s.sigma[k] >= s.sigma[k + 1];
      ordered = ordered && s.sigma.back() >= 0.0;
    }
    o.require(worst <= 1e-8 && ordered, "svd " + std::to_string(m) + "x" + std::to_string(n) + " recon " + fmt(worst));
  }

  double sub_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = oracle::random_matrix(4, 3, gen);
    const Matrix g = nuclear_norm_subgradient(a);
    const std::vector<double> x(a.entries().begin(), a.entries().end());
    const auto fd = oracle::central_differences(
        [&](const std::vector<double>& v) { return nuclear_norm(Matrix(4, 3, v)); }, x, 1e-6);
    sub_worst = std::max(sub_worst, oracle::relative_error(g.entries(), fd));
  }
  o.require(sub_worst < 1e-5, "subgradient rel err " + fmt(sub_worst));

  const SampleBatch flat = sample_synthetic2d({.flip_prob = 0.7, .n = 64, .seed = 62});
  const SampleBatch theory = sample_theory({.r = 5, .d = 12, .gamma = 0.4, .n = 64, .seed = 63, .allow_out_of_regime = true});
  struct Case {
    const char* name;
    Objective objective;
    bool linear;
  };
  const std::vector<Case> cases{{"erm/linear", Objective::erm(), true},
                                {"erm-nu/linear", Objective::nuclear(0.05), true},
                                {"erm/theory", Objective::erm(), false},
                                {"erm-l2/theory", Objective::weight_decay(0.05), false},
                                {"erm-rank/theory", Objective::rank(3), false}};
  for (const Case& c : cases) {
    double worst = 0.0;
    const SampleBatch& batch = c.linear ? flat : theory;
    for (int state = 0; state < 20; ++state) {
      Model model = c.linear ? Model{random_linear_model(3, 2, gen.next(), 1.0)} : Model{TheoryModel{}};
      if (!c.linear) {
        std::vector<double> w(12);
        for (double& v : w) v = gen.uniform() - 0.5;
        model = TheoryModel{w, std::nullopt};
      }
      const std::vector<double> g = parameters(gradient(model, batch, c.objective));
      const auto fd = oracle::central_differences(
          [&](const std::vector<double>& v) {
            Model m = model;
            set_parameters(m, v);
            return risk(m, batch, c.objective);
          },
          parameters(model), 1e-6);
      worst = std::max(worst, oracle::relative_error(g, fd));
    }
    o.require(worst < 1e-4, std::string(c.name) + " grad rel err " + fmt(worst));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  Synthetic2dConfig config;
  const std::vector<double> grid = default_lambda_grid();
  const SweepResult sweep = run_lambda_sweep(grid, config);
  o.require(sweep.complete, "sweep complete");
  if (sweep.records.size() != grid.size()) return o;
  const double first = sweep.records.front().stable_rank;
  const double last = sweep.records.back().stable_rank;
  o.require(last < first, "stable rank " + fmt(last) + " at lambda " + fmt(grid.back()) + " < " + fmt(first) +
                              " at lambda 0");

  const Synthetic2dData data = make_synthetic2d_data(config);
  const TrainResult erm = train_synthetic2d(data, config, Objective::erm());
  SweepRecord rec = evaluate_sweep_point(erm.model, 0.0, data);
  rec.steps = erm.steps;
  rec.converged = erm.converged;
  o.require(sweep_row_csv(rec) == sweep_row_csv(sweep.records.front()), "lambda=0 row matches plain ERM");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nudg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome criterion8() {
  Outcome o;
  const fs::path root = oracle::scratch_dir("acceptance-repro");
  const std::vector<std::vector<std::string>> commands{
      {"synth2d", "--n-eval", "20000", "--resolution", "100"},
      {"sweep", "--n-eval", "20000"},
      {"theory", "--n-train", "1000", "--n-eval", "100000", "--n-reduced", "100000", "--rank-steps", "50"},
      {"verify", "--suite", "lemma2"},
  };
  for (const auto& cmd : commands) {
    const fs::path a = root / (cmd[0] + "-a");
    const fs::path b = root / (cmd[0] + "-b");
    std::vector<std::string> args = cmd;
    args.insert(args.end(), {"--out", a.string()});
    const int first = invoke(args);
    const int second = invoke({"--config", (a / "resolved-config.toml").string(), "--out", b.string()});
    std::size_t files = 0;
    bool same = first == second && first == cli::kSuccess;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      same = same && slurp(entry.path()) == slurp(b / entry.path().filename());
    }
    o.require(same && files > 0, cmd[0] + " " + std::to_string(files) + " csv files, exit " + std::to_string(first));
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 synthetic 2-D ERM vs ERM-NU", criterion1},  {"2 rank vs weight-decay OOD gap", criterion2},
      {"3 weight-decay optimum structure", criterion3}, {"4 rank-constrained support", criterion4},
      {"5 loss, moment and tail suites", criterion5},  {"6 numerics", criterion6},
      {"7 lambda sweep", criterion7},                   {"8 reproducibility", criterion8},
  };
  bool all = true;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.label << " (" << fmt(secs) << " s): " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
