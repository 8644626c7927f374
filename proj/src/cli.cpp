#include "jflow/cli.hpp"

#include "jflow/dhym.hpp"
#include "jflow/lattice.hpp"
#include "jflow/projcheck.hpp"
#include "jflow/vortexcfg.hpp"
#include "jflow/vortexsolve.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace jflow::cli {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>>& allowedParameters() {
  static const std::map<std::string, std::set<std::string>> table{
      {"stability", {"input", "k_samples"}},
      {"vortex-window", {"r1", "r2"}},
      {"vortex-check", {"r1", "r2", "s", "lambda2"}},
      {"vortex-solve", {"r1", "r2", "s", "lambda2"}},
      {"projective", {"n"}},
      {"dhym", {"from", "eps", "newton"}},
      {"sweep", {"r1_list", "r2_list", "s_list", "lambda2", "threads", "with_dhym"}},
  };
  return table;
}

std::string requireParam(const RunConfig& c, const std::string& key) {
  const auto it = c.parameters.find(key);
  if (it == c.parameters.end())
    throw std::invalid_argument("missing parameter '" + key + "' for subcommand '" +
                                c.subcommand + "'");
  return it->second;
}

std::string paramOr(const RunConfig& c, const std::string& key, const std::string& fallback) {
  const auto it = c.parameters.find(key);
  return it == c.parameters.end() ? fallback : it->second;
}

long long parseInt(const std::string& text, const std::string& field) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("field '" + field + "': cannot parse integer from '" +
                                text + "'");
  }
}

double parseReal(const std::string& text, const std::string& field) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("field '" + field + "': cannot parse real from '" + text +
                                "'");
  }
}

Rational parseRationalField(const std::string& text, const std::string& field) {
  try {
    return Rational::fromString(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument("field '" + field + "': " + e.what());
  }
}

fs::path ensureOutputDir(const RunConfig& c) {
  fs::path dir(c.output_dir);
  if (!dir.empty()) fs::create_directories(dir);
  return dir;
}

void emit(const Json& report, const fs::path& dir, const std::string& filename) {
  writeJsonFile(dir / filename, report);
  std::cout << report.dump(2) << std::endl;
}

// ---------------------------------------------------------------------------
// stability

Json sheafJson(const StabilityDocument& doc, const std::string& name, const SheafChern& sh,
               const LatticeClass& omega) {
  Json j;
  const auto [pos2, pos1] = positivityCheck(sh, omega);
  j["positivity"] = {pos2, pos1};
  j["rank"] = sh.rank.str();
  if (sh.ch2.sign() > 0)
    j["j_constant"] = jConstant(sh, omega).str();
  else
    j["j_constant"] = nullptr;
  (void)doc;
  (void)name;
  return j;
}

int runStability(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  const StabilityDocument doc = parseStabilityDocument(readJsonFile(requireParam(c, "input")));
  const auto omega_it = doc.classes.find("omega");
  if (omega_it == doc.classes.end())
    throw std::invalid_argument("document: class 'omega' is required");
  const LatticeClass& omega = omega_it->second;
  const LatticeClass* l = nullptr;
  if (const auto it = doc.classes.find("L"); it != doc.classes.end()) l = &it->second;

  bool invariants_ok = true;
  Json report;
  report["basis"] = doc.lattice.basisNames();

  for (const auto& [name, sh] : doc.sheaves)
    report["sheaves"][name] = sheafJson(doc, name, sh, omega);

  if (!doc.ambient.empty()) {
    const SheafChern& amb = doc.sheaves.at(doc.ambient);
    Json rows = Json::array();
    for (const auto& [name, sh] : doc.sheaves) {
      if (name == doc.ambient || sh.rank.sign() <= 0) continue;
      Json row;
      row["sub"] = name;
      row["ambient"] = doc.ambient;
      row["margin"] = jStabilityMargin(sh, amb, omega).str();
      row["classification"] = nameOf(jStabilityTest(sh, amb, omega));
      if (l) {
        try {
          const AsymptoticComparison cmp = asymptoticCompare(sh, amb, omega, *l);
          row["asymptotic"]["verdict"] = nameOf(cmp.verdict);
          if (cmp.discrepancy_order == AsymptoticComparison::infinitySentinel())
            row["asymptotic"]["discrepancy_order"] = "inf";
          else
            row["asymptotic"]["discrepancy_order"] = cmp.discrepancy_order;
          const bool see_saw = seeSawCheck(sh, amb, omega, *l, doc.k_samples);
          row["see_saw"] = see_saw;
          if (!see_saw) invariants_ok = false;
        } catch (const std::domain_error& e) {
          row["asymptotic"] = {{"error", e.what()}};
        }
      }
      rows.push_back(row);
    }
    report["stability"] = rows;
  }

  if (l) {
    for (const auto& [name, sh] : doc.sheaves) {
      if (sh.rank.sign() <= 0) continue;
      try {
        const AsymptoticSlope slope = asymptoticJSlope(sh, omega, *l);
        report["asymptotic_slopes"][name] = {{"leading", slope.leading.str()},
                                             {"constant", slope.constant.str()}};
      } catch (const std::domain_error&) {
      }
    }
    const LatticeClass eta = etaClass(omega, *l);
    Json je;
    std::vector<std::string> coeffs;
    for (Eigen::Index i = 0; i < eta.coeffs().size(); ++i)
      coeffs.push_back(eta.coeff(i).str());
    je["class"] = coeffs;
    const CurveTestReport ct = curvePositivity(eta, doc.curves);
    je["status"] = ct.status == CurveTestStatus::Verified    ? "VERIFIED"
                   : ct.status == CurveTestStatus::Unverified ? "UNVERIFIED"
                                                              : "FAILED";
    Json pairings = Json::array();
    for (const auto& p : ct.pairings) pairings.push_back(p.str());
    je["pairings"] = pairings;
    report["eta"] = je;
  }

  emit(report, dir, "stability_report.json");
  return invariants_ok ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------------------
// vortex window / check

Json windowJson(const AdmissibleWindow& w) {
  Json j;
  j["empty"] = w.empty;
  j["upper"] = w.upper.str();
  j["lower"] = formatDouble(w.lower());
  j["lower_enclosure"] = {w.lower_lo.str(), w.lower_hi.str()};
  j["enclosure_width"] = formatDouble(w.enclosureWidth());
  return j;
}

int runVortexWindow(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  const long long r1 = parseInt(requireParam(c, "r1"), "r1");
  const long long r2 = parseInt(requireParam(c, "r2"), "r2");
  Json report = windowJson(admissibleWindow(r1, r2));
  report["r1"] = r1;
  report["r2"] = r2;
  emit(report, dir, "window.json");
  return kOk;
}

int runVortexCheck(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  const long long r1 = parseInt(requireParam(c, "r1"), "r1");
  const long long r2 = parseInt(requireParam(c, "r2"), "r2");
  const Rational s = parseRationalField(requireParam(c, "s"), "s");
  const VortexParams p(r1, r2, s);
  const VortexChern vc = vortexChern(p);

  Json report;
  report["r1"] = r1;
  report["r2"] = r2;
  report["s"] = s.str();
  report["ch1"] = {vc.ch1.coeff(0).str(), vc.ch1.coeff(1).str()};
  report["omega_ch1"] = vc.omega_ch1.str();
  report["ch2"] = vc.ch2.str();
  report["c"] = vc.c.str();
  const auto [pos2, pos1] = positivityCheck(vc.sheaf(), vortexOmega(p));
  report["positivity"] = {pos2, pos1};

  if (r2 >= 2) {
    report["window"] = windowJson(admissibleWindow(r1, r2));
    report["inside_window"] = nameOf(insideWindow(p));
  }
  const AlphaReport ar = alphaCheck(p);
  report["alpha"] = {{"value", ar.alpha.str()},
                     {"greater_than_1", ar.alpha_gt_1},
                     {"roots", {ar.root_low.str(), ar.root_high.str()}},
                     {"routes_agree", ar.routes_agree}};
  if (r2 >= 2) {
    const KappaConditionReport kr = kappaCondition(p);
    report["kappa_condition"] = {{"holds", kr.holds}, {"routes_agree", kr.routes_agree}};
  }
  const GriffithClassReport gr = griffithClassPositivity(p);
  report["griffith_class"] = {{"coeff_sigma", gr.coeff_sigma.str()},
                              {"coeff_fiber", gr.coeff_fiber.str()},
                              {"positive", gr.positive}};
  report["sub_line_bundle"] = {
      {"margin", jStabilityMargin(vortexSubLineBundle(p), vc.sheaf(), vortexOmega(p)).str()},
      {"classification",
       nameOf(jStabilityTest(vortexSubLineBundle(p), vc.sheaf(), vortexOmega(p)))}};

  bool routes_ok = ar.routes_agree && gr.positive;
  if (r2 >= 2) routes_ok = routes_ok && report["kappa_condition"]["routes_agree"].get<bool>();
  emit(report, dir, "check.json");
  return routes_ok ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------------------
// vortex solve

Json verifyJson(const VerifyReport& rep, const MetricFactor& mf) {
  Json j;
  j["sup_res_hfS"] = formatDouble(rep.sup_res_hfs);
  j["sup_res_fS"] = formatDouble(rep.sup_res_fs);
  j["integral_identity"] = {{"lhs", formatDouble(rep.integral_identity_lhs)},
                            {"rhs", formatDouble(rep.integral_identity_rhs)},
                            {"rel_err", formatDouble(rep.integral_identity_rel_err)}};
  j["positivity_min"] = {{"pI", formatDouble(rep.p1_min)},
                         {"pII", formatDouble(rep.p2_min)},
                         {"pIII", formatDouble(rep.p3_min)},
                         {"pIV", formatDouble(rep.p4_min)},
                         {"pV", formatDouble(rep.p5_min)}};
  j["griffith_positive"] = rep.griffith_positive;
  j["p1_identity_err"] = formatDouble(rep.p1_identity_err);
  j["p2_identity_err"] = formatDouble(rep.p2_identity_err);
  j["compatibility_defect"] = formatDouble(mf.defect);
  return j;
}

struct SolveArtifacts {
  SolveStatus status;
  Json report;
  bool verification_ok = true;
};

SolveArtifacts solveToDisk(const Problem& pb, const RunConfig& c, const fs::path& dir) {
  ContinuationSchedule sched;
  sched.tol = c.tol;
  const ContinuationResult res = continuationSolve(pb, sched);

  Json trace = Json::array();
  for (const auto& st : res.trace) {
    Json js;
    js["t"] = st.t;
    js["newton_iters"] = st.newton_iters;
    js["residual_sup"] = st.residual_sup;
    js["psi"] = std::vector<double>(st.psi.data(), st.psi.data() + st.psi.size());
    trace.push_back(std::move(js));
  }
  writeJsonFile(dir / "trace.json", trace);

  SolveArtifacts out{res.status, Json::object(), true};
  out.report["params"] = {{"r1", pb.params.r1}, {"r2", pb.params.r2},
                          {"s", pb.params.s.str()}, {"lambda2", pb.lambda2},
                          {"grid", pb.grid.n},    {"tol", c.tol}};
  out.report["status"] = nameOf(res.status);
  out.report["last_good_t"] = res.last_good_t;
  out.report["monitors"] = {{"max_psi", formatDouble(res.max_psi)},
                            {"min_one_minus_q", formatDouble(res.min_one_minus_q)},
                            {"q_bound_ok", res.q_bound_ok},
                            {"jacobian_fd_max_rel_err", formatDouble(res.fd_max_rel_err)}};
  if (!res.error_message.empty()) out.report["error"] = res.error_message;

  if (res.status != SolveStatus::Converged) {
    writeJsonFile(dir / "report.json", out.report);
    std::cout << out.report.dump(2) << std::endl;
    return out;
  }

  const MetricFactor mf = recoverF(pb, res.psi);
  const ReducedCurvature rc = reducedCurvature(pb, res.psi, mf);
  const VerifyReport vrep = verifySolution(pb, rc);
  out.report["verify"] = verifyJson(vrep, mf);

  const double c_d = pb.c, s_d = pb.s, r2_d = pb.r2();
  const RadialField p1 = 2.0 * c_d * rc.fh_hat + 2.0 * c_d * rc.ff_hat +
                         2.0 * c_d * pb.r1() - s_d;
  const RadialField p2 = 2.0 * c_d * rc.ff_hat + 2.0 * c_d * pb.r1() - s_d;
  const RadialField p4 = 4.0 * c_d * r2_d - 2.0 * c_d * rc.q - 1.0 + 4.0 * c_d;
  const RadialField p5 = 2.0 * c_d * p4 * rc.fh_hat +
                         2.0 * (4.0 * c_d * r2_d + 2.0 * c_d - 1.0) * p2 -
                         4.0 * c_d * c_d * rc.w;

  CsvWriter csv(dir / "solution.csv",
                {"x", "psi", "q", "Fh_hat", "rho", "Ff_hat", "W", "res_hfS", "res_fS", "pI",
                 "pII", "pV"});
  for (int i = 0; i < pb.grid.n; ++i) {
    csv.field(pb.x[i])
        .field(res.psi[i])
        .field(rc.q[i])
        .field(rc.fh_hat[i])
        .field(rc.rho[i])
        .field(rc.ff_hat[i])
        .field(rc.w[i])
        .field(vrep.res_hfs[i])
        .field(vrep.res_fs[i])
        .field(p1[i])
        .field(p2[i])
        .field(p5[i]);
    csv.endRow();
  }

  out.verification_ok = res.q_bound_ok && vrep.griffith_positive &&
                        res.fd_max_rel_err <= 1e-5;
  out.report["verification_ok"] = out.verification_ok;
  writeJsonFile(dir / "report.json", out.report);
  std::cout << out.report.dump(2) << std::endl;
  return out;
}

int runVortexSolve(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  const long long r1 = parseInt(requireParam(c, "r1"), "r1");
  const long long r2 = parseInt(requireParam(c, "r2"), "r2");
  const Rational s = parseRationalField(requireParam(c, "s"), "s");
  const double lambda2 = parseReal(requireParam(c, "lambda2"), "lambda2");
  const Problem pb(VortexParams(r1, r2, s), lambda2, c.grid);
  const SolveArtifacts art = solveToDisk(pb, c, dir);
  switch (art.status) {
    case SolveStatus::PositivityLoss: return kPositivityLoss;
    case SolveStatus::ContinuationStuck: return kContinuationStuck;
    case SolveStatus::Converged: break;
  }
  return art.verification_ok ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------------------
// projective

int runProjective(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  const long long n = parseInt(requireParam(c, "n"), "n");
  if (n < 1 || n > 4) throw std::invalid_argument("field 'n': must be in 1..4");
  const JResidualReport rep = jResidual(static_cast<int>(n));
  const ChernInvariants inv = chernInvariants(static_cast<int>(n));

  Json report;
  report["n"] = n;
  report["j_residual_zero"] = rep.residual_zero;
  report["factor"] = rep.factor.str();
  report["invariant"] = inv.n_ch_n.str();
  report["omega_ch_nm1"] = inv.omega_ch_nm1.str();
  report["constant"] = rep.constant.str();
  bool ok = rep.residual_zero && rep.both_sides_factor;
  if (n == 2) {
    const GramReport gram = jPositivityGram();
    report["gram_min_eig"] = gram.min_eigenvalue;
    report["gram_eig_residual"] = formatDouble(gram.eig_residual);
    const GriffithDirectionReport gd = griffithFromPositivity();
    report["griffith_positive"] = gd.positive;
    ok = ok && gram.min_eigenvalue > 0.0 && gd.positive;
  }
  emit(report, dir, "projective.json");
  return ok ? kOk : kVerificationFailure;
}

// ---------------------------------------------------------------------------
// dhym

struct LoadedSolve {
  Problem pb;
  RadialField psi;
};

LoadedSolve loadSolve(const fs::path& from) {
  const Json rep = readJsonFile(from / "report.json");
  const Json& params = rep.at("params");
  const VortexParams p(params.at("r1").get<long long>(), params.at("r2").get<long long>(),
                       Rational::fromString(params.at("s").get<std::string>()));
  Problem pb(p, params.at("lambda2").get<double>(), params.at("grid").get<int>());

  std::ifstream csv(from / "solution.csv");
  if (!csv) throw std::runtime_error("cannot open " + (from / "solution.csv").string());
  std::string line;
  std::getline(csv, line);  // header
  RadialField psi(pb.grid.n);
  int i = 0;
  while (std::getline(csv, line) && i < pb.grid.n) {
    const auto fields = splitList(line);
    if (fields.size() < 2) throw std::runtime_error("solution.csv: malformed row");
    psi[i++] = std::stod(fields[1]);
  }
  if (i != pb.grid.n) throw std::runtime_error("solution.csv: wrong row count");
  return {std::move(pb), std::move(psi)};
}

int runDhym(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  LoadedSolve ls = loadSolve(requireParam(c, "from"));
  const MetricFactor mf = recoverF(ls.pb, ls.psi);
  const ReducedCurvature rc = reducedCurvature(ls.pb, ls.psi, mf);
  DhymContext ctx(ls.pb, rc, ls.psi);

  std::vector<double> eps;
  for (const auto& tok :
       splitList(paramOr(c, "eps", "1e-1,1e-1.5,1e-2,1e-2.5,1e-3")))
    eps.push_back(parseEps(tok));
  const bool with_newton = paramOr(c, "newton", "1") != "0";

  CsvWriter csv(dir / "dhym_scaling.csv", {"eps", "theta", "res_sup", "res_post_newton"});
  std::vector<double> post(eps.size(), 0.0);
  for (size_t i = 0; i < eps.size(); ++i) {
    const double theta = ctx.phase.thetaAt(eps[i]);
    const DhymResidual res = reducedDhymResidual(ctx, eps[i]);
    double post_newton = std::numeric_limits<double>::quiet_NaN();
    if (with_newton) post_newton = newtonCorrection(ctx, eps[i]).post_sup;
    post[i] = post_newton;
    csv.field(eps[i]).field(theta).field(res.sup()).field(post_newton);
    csv.endRow();
  }

  Json report;
  try {
    const ScalingFit fit = scalingFit(ctx, eps);
    report["residual_slope"] = formatDouble(fit.slope);
    report["points_used"] = fit.points_used;
    report["floor"] = formatDouble(fit.floor);
  } catch (const InconclusiveError& e) {
    report["residual_slope"] = nullptr;
    report["inconclusive"] = e.what();
  }
  if (with_newton) {
    std::vector<double> xs, ys;
    for (size_t i = 0; i < eps.size(); ++i)
      if (post[i] > 0.0 && std::isfinite(post[i])) {
        xs.push_back(eps[i]);
        ys.push_back(post[i]);
      }
    if (xs.size() >= 2) report["post_newton_slope"] = formatDouble(fitLogSlope(xs, ys));
  }
  report["theta_at_min_eps"] =
      formatDouble(ctx.phase.thetaAt(*std::min_element(eps.begin(), eps.end())));
  emit(report, dir, "dhym_report.json");
  if (report.contains("inconclusive")) return kVerificationFailure;
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
  long long r1, r2;
  Rational s;
  std::string window;
  std::string status;
  double final_res = 0.0;
  double sup_hfs = 0.0, sup_fs = 0.0;
  bool griffith = false;
  double defect = 0.0;
  std::string dhym_slope;  // optional, empty when not computed
};

int runSweep(const RunConfig& c) {
  const fs::path dir = ensureOutputDir(c);
  std::vector<long long> r1s, r2s;
  std::vector<Rational> ss;
  for (const auto& t : splitList(requireParam(c, "r1_list"))) r1s.push_back(parseInt(t, "r1_list"));
  for (const auto& t : splitList(requireParam(c, "r2_list"))) r2s.push_back(parseInt(t, "r2_list"));
  for (const auto& t : splitList(requireParam(c, "s_list"))) ss.push_back(parseRationalField(t, "s_list"));
  const double lambda2 = parseReal(paramOr(c, "lambda2", "0.4"), "lambda2");
  const bool with_dhym = paramOr(c, "with_dhym", "0") != "0";
  const int threads =
      std::max(1, static_cast<int>(parseInt(paramOr(c, "threads", "2"), "threads")));

  struct Task {
    long long r1, r2;
    Rational s;
  };
  std::vector<Task> tasks;
  for (long long r1 : r1s)
    for (long long r2 : r2s)
      for (const auto& s : ss) tasks.push_back({r1, r2, s});
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.s < b.s;
  });

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& t = tasks[i];
      SweepRow row{t.r1, t.r2, t.s, "?", "REJECTED", 0.0, 0.0, 0.0, false, 0.0, ""};
      try {
        const VortexParams p(t.r1, t.r2, t.s);
        row.window = t.r2 >= 2 ? nameOf(insideWindow(p)) : "NO";
        ContinuationSchedule sched;
        sched.tol = c.tol;
        const Problem pb(p, lambda2, c.grid);
        const ContinuationResult res = continuationSolve(pb, sched);
        row.status = res.status == SolveStatus::Converged ? "SOLVED" : nameOf(res.status);
        if (res.status == SolveStatus::Converged) {
          row.final_res = res.trace.back().residual_sup;
          const MetricFactor mf = recoverF(pb, res.psi);
          const ReducedCurvature rc = reducedCurvature(pb, res.psi, mf);
          const VerifyReport vrep = verifySolution(pb, rc);
          row.sup_hfs = vrep.sup_res_hfs;
          row.sup_fs = vrep.sup_res_fs;
          row.griffith = vrep.griffith_positive;
          row.defect = mf.defect;
          if (with_dhym) {
            DhymContext ctx(pb, rc, res.psi);
            const ScalingFit fit =
                scalingFit(ctx, {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3});
            row.dhym_slope = formatDouble(fit.slope);
          }
        }
      } catch (const std::exception& e) {
        row.status = std::string("ERROR: ") + e.what();
      }
      rows[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  CsvWriter csv(dir / "sweep.csv",
                {"r1", "r2", "s", "window", "status", "final_res", "sup_res_hfS",
                 "sup_res_fS", "griffith_positive", "defect", "dhym_slope"});
  for (const auto& row : rows) {
    csv.field(row.r1)
        .field(row.r2)
        .field(row.s.str())
        .field(row.window)
        .field(row.status)
        .field(row.final_res)
        .field(row.sup_hfs)
        .field(row.sup_fs)
        .field(std::string(row.griffith ? "true" : "false"))
        .field(row.defect)
        .field(row.dhym_slope);
    csv.endRow();
  }
  std::cout << "sweep: " << rows.size() << " rows -> " << (dir / "sweep.csv").string()
            << std::endl;
  return kOk;
}

}  // namespace

Json RunConfig::toJson() const {
  Json j;
  j["subcommand"] = subcommand;
  j["parameters"] = parameters;
  j["output_dir"] = output_dir;
  j["grid"] = grid;
  j["tol"] = tol;
  return j;
}

RunConfig RunConfig::fromJson(const Json& j) {
  RunConfig c;
  for (const auto& [key, val] : j.items()) {
    if (key == "subcommand")
      c.subcommand = val.get<std::string>();
    else if (key == "parameters")
      c.parameters = val.get<std::map<std::string, std::string>>();
    else if (key == "output_dir")
      c.output_dir = val.get<std::string>();
    else if (key == "grid")
      c.grid = val.get<int>();
    else if (key == "tol")
      c.tol = val.get<double>();
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  const auto& table = allowedParameters();
  const auto it = table.find(c.subcommand);
  if (it == table.end())
    throw std::invalid_argument("config: unknown subcommand '" + c.subcommand + "'");
  for (const auto& [key, val] : c.parameters) {
    (void)val;
    if (!it->second.count(key))
      throw std::invalid_argument("config: unknown parameter '" + key +
                                  "' for subcommand '" + c.subcommand + "'");
  }
  if (c.grid < 8) throw std::invalid_argument("config: grid must be >= 8");
  if (!(c.tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
}

double parseEps(const std::string& text) {
  const auto e = text.find_first_of("eE");
  if (e == std::string::npos) return parseReal(text, "eps");
  const double mant = parseReal(text.substr(0, e), "eps");
  const double expo = parseReal(text.substr(e + 1), "eps");
  return mant * std::pow(10.0, expo);
}

std::vector<std::string> splitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

int run(const RunConfig& config) {
  try {
    validate(config);
    if (config.subcommand == "stability") return runStability(config);
    if (config.subcommand == "vortex-window") return runVortexWindow(config);
    if (config.subcommand == "vortex-check") return runVortexCheck(config);
    if (config.subcommand == "vortex-solve") return runVortexSolve(config);
    if (config.subcommand == "projective") return runProjective(config);
    if (config.subcommand == "dhym") return runDhym(config);
    if (config.subcommand == "sweep") return runSweep(config);
    std::cerr << "unknown subcommand: " << config.subcommand << std::endl;
    return kConfigError;
  } catch (const PositivityLossError& e) {
    std::cerr << "POSITIVITY_LOSS: " << e.what() << std::endl;
    return kPositivityLoss;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfigError;
  } catch (const InconclusiveError& e) {
    std::cerr << "INCONCLUSIVE: " << e.what() << std::endl;
    return kVerificationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kVerificationFailure;
  }
}

}  // namespace jflow::cli
