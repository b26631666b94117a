#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "cdef/builtins.hpp"
#include "cdef/conformal.hpp"
#include "cdef/errors.hpp"
#include "cdef/extension.hpp"
#include "cdef/lightcone.hpp"
#include "cdef/manifest.hpp"
#include "manifest_fields.hpp"

namespace cdef {

namespace {

using namespace fields;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

int negative_index(const ScalarProduct& s) {
  const Eigen::SelfAdjointEigenSolver<Mat> es(s.gram());
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) k += es.eigenvalues()(i) < 0;
  return k;
}

struct Run {
  const Json& m;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  Exec exec = default_exec();
  std::optional<int> region;
  Json checks = Json::array();
  bool pass = true;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Tolerance tolerance() const {
    Tolerance t;
    t.rank = tol;
    return t;
  }

  double threshold(const std::string& name, double def) const {
    if (m.contains("thresholds") && m["thresholds"].contains(name))
      return get_double(m["thresholds"], name, "/thresholds");
    return def;
  }

  void record(const std::string& name, Json value, const char* op, Json bound, bool ok) {
    Json c;
    c["name"] = name;
    c["value"] = std::move(value);
    c["op"] = op;
    c["threshold"] = std::move(bound);
    c["pass"] = ok;
    checks.push_back(std::move(c));
    pass = pass && ok;
  }
  void le(const std::string& name, double v, double def) {
    const double t = threshold(name, def);
    record(name, v, "<=", t, v <= t);
  }
  void ge(const std::string& name, double v, double def) {
    const double t = threshold(name, def);
    record(name, v, ">=", t, v >= t);
  }
  void eq(const std::string& name, long v, long expected) { record(name, v, "==", expected, v == expected); }
  void eq(const std::string& name, const std::string& v, const std::string& expected) {
    record(name, v, "==", expected, v == expected);
  }
  void truth(const std::string& name, bool v) { record(name, v, "==", true, v); }
};

const Json& expect_of(const Json& m) {
  static const Json empty = Json::object();
  return m.contains("expect") ? m["expect"] : empty;
}

// --- lightcone --------------------------------------------------------------

Json psi_identities(Run& run, const Json& spec) {
  const std::string path = "/random_points";
  const int count = optional_int(spec, "count", path, 1000, 1);
  const int N = optional_int(spec, "N", path, 3, 1);
  const double scale = optional_double(spec, "scale", path, 1.0);
  const LightConeModel model(N);
  const ScalarProduct& L = model.ambient();
  std::mt19937_64 rng(run.seed);
  std::normal_distribution<double> nd(0.0, scale);
  double cone = 0, e0 = 0, iso = 0, dist = 0, proj = 0;
  for (int t = 0; t < count; ++t) {
    Vec x(N), y(N), v(N), w(N);
    for (int i = 0; i < N; ++i) x(i) = nd(rng), y(i) = nd(rng), v(i) = nd(rng), w(i) = nd(rng);
    const Vec px = model.psi(x);
    cone = std::max(cone, std::abs(L.norm2(px)));
    e0 = std::max(e0, std::abs(L(px, model.e(0)) - 1.0));
    iso = std::max(iso, std::abs(L(model.dpsi(x, v), model.dpsi(x, w)) - v.dot(w)));
    dist = std::max(dist, std::abs(L(px, model.psi(y)) + 0.5 * (x - y).squaredNorm()));
    proj = std::max(proj, (model.project(3.0 * px) - x).norm());
  }
  Json r;
  r["count"] = count;
  r["N"] = N;
  r["cone"] = cone;
  r["e0_pairing"] = e0;
  r["isometry"] = iso;
  r["distance"] = dist;
  r["projection"] = proj;
  run.le("psi.cone", cone, 1e-12);
  run.le("psi.e0_pairing", e0, 1e-12);
  run.le("psi.isometry", iso, 1e-12);
  run.le("psi.distance", dist, 1e-12);
  run.le("psi.projection", proj, 1e-12);
  return r;
}

Json round_trip(Run& run, const Json& e, const std::string& path, const std::string& label) {
  const ImmersionPtr f = immersion_from_json(require(e, "immersion", path), path + "/immersion");
  const ImmersionPtr base = e.contains("base") ? immersion_from_json(e["base"], path + "/base") : nullptr;
  const Grid grid = grid_from_json(require(e, "grid", path), path + "/grid");
  const ImmersionPtr rep = isometric_representative(f, base);
  const ImmersionPtr back = cone_projection(rep);
  const ImmersionPtr ref = base ? base : f;
  std::vector<double> pos(grid.size()), met(grid.size());
  for_each_index(grid.size(), run.exec, [&](std::size_t k) {
    const Vec u = grid.point(k);
    const PointJet a = f->point(u, 1), b = back->point(u, 1);
    pos[k] = std::max((a.x - b.x).norm(), (a.d1 - b.d1).norm());
    const PointJet r = rep->point(u, 1), c = ref->point(u, 1);
    const Mat gr = r.d1.transpose() * rep->ambient().gram() * r.d1;
    const Mat gc = c.d1.transpose() * ref->ambient().gram() * c.d1;
    met[k] = (gr - gc).norm() / std::max(1.0, gc.norm());
  });
  const PositionResidual pr = position_identities(rep, grid, Vec(), run.tolerance(), run.exec);
  // <f', e0> is constant only for the plain lift, so A_e0 is checked there.
  const PositionResidual lift = position_identities(psi_lift(f), grid, Vec(), run.tolerance(), run.exec);
  Json r;
  r["label"] = label;
  r["immersion"] = f->name();
  r["representative"] = rep->name();
  r["grid_points"] = grid.size();
  r["position"] = *std::max_element(pos.begin(), pos.end());
  r["metric"] = *std::max_element(met.begin(), met.end());
  r["shape_plus_identity"] = pr.shape_plus_identity;
  r["witness_shape"] = pr.witness_shape;
  r["cone"] = pr.cone;
  r["lift_shape_plus_identity"] = lift.shape_plus_identity;
  r["lift_witness_shape"] = lift.witness_shape;
  run.le(label + ".position", r["position"].get<double>(), 1e-10);
  run.le(label + ".metric", r["metric"].get<double>(), 1e-8);
  run.le(label + ".shape_plus_identity", pr.shape_plus_identity, 1e-8);
  run.le(label + ".lift_shape_plus_identity", lift.shape_plus_identity, 1e-8);
  run.le(label + ".lift_witness_shape", lift.witness_shape, 1e-8);
  return r;
}

DistributionFrame constant_frame(const Json& spec, const std::string& key, const std::string& path, const Grid& grid,
                                 const Run& run) {
  const Json& d = require(spec, key, path);
  if (!d.is_array() || d.empty()) throw ManifestError(path + "/" + key + ": expected a non-empty list of chart vectors");
  Mat B(grid.dim(), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    B.col(static_cast<Eigen::Index>(i)) = vector_value(d[i], path + "/" + key + "/" + std::to_string(i), grid.dim());
  return DistributionFrame::build(grid, [B](const Vec&) { return B; }, run.tolerance(), 2e-3, run.exec);
}

Json transfer(Run& run, const Json& spec) {
  const std::string path = "/transfer";
  const ImmersionPtr f = immersion_from_json(require(spec, "immersion", path), path + "/immersion");
  const ImmersionPtr base = spec.contains("base") ? immersion_from_json(spec["base"], path + "/base") : nullptr;
  const Grid grid = grid_from_json(require(spec, "grid", path), path + "/grid");
  const DistributionFrame D = constant_frame(spec, "delta", path, grid, run);
  Json r;
  r["immersion"] = f->name();
  r["delta_rank"] = D.rank;
  for (const auto mode : {HessianMode::closed_form, HessianMode::finite_difference}) {
    const bool closed = mode == HessianMode::closed_form;
    const std::string key = closed ? "closed_form" : "finite_difference";
    const SffTransferData t = sff_transfer_check(f, base, D, mode, 1e-3, run.tolerance(), run.exec);
    Json m;
    m["sff"] = t.sffs_residual;
    m["sff3"] = t.sffs3_residual;
    m["eta"] = t.etas_residual;
    m["lambda_spread"] = t.lambda_spread;
    m["ruled"] = t.ruled_residual;
    r[key] = m;
    const double bound = closed ? 1e-7 : 1e-5;
    run.le("transfer." + key + ".sff", t.sffs_residual, bound);
    run.le("transfer." + key + ".sff3", t.sffs3_residual, bound);
    if (closed) run.le("transfer.closed_form.lambda_spread", t.lambda_spread, 1e-6);
  }
  return r;
}

Json analyze_lightcone(Run& run) {
  Json res = Json::object();
  if (run.m.contains("random_points")) res["psi"] = psi_identities(run, run.m["random_points"]);
  if (run.m.contains("round_trip")) {
    const Json& list = run.m["round_trip"];
    if (!list.is_array()) throw ManifestError("/round_trip: expected an array");
    Json out = Json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "/round_trip/" + std::to_string(i);
      const std::string label = optional_string(list[i], "label", path, "round_trip[" + std::to_string(i) + "]");
      out.push_back(round_trip(run, list[i], path, label));
    }
    res["round_trip"] = out;
  }
  if (run.m.contains("transfer")) res["transfer"] = transfer(run, run.m["transfer"]);
  if (res.empty()) throw ManifestError("/: lightcone analysis needs random_points, round_trip or transfer");
  return res;
}

// --- single immersion -------------------------------------------------------

std::size_t point_index(const Json& m, const Grid& grid) {
  if (!m.contains("point") || (m["point"].is_string() && m["point"] == "center")) return grid.center();
  if (m["point"].is_number_integer()) {
    const long k = m["point"].get<long>();
    if (k < 0 || static_cast<std::size_t>(k) >= grid.size())
      throw ManifestError("/point: index out of range [0, " + std::to_string(grid.size()) + ")");
    return static_cast<std::size_t>(k);
  }
  return grid.nearest(vector_value(m["point"], "/point", grid.dim()));
}

NullityOptions nullity_options(const Run& run, const Json& spec, const std::string& path) {
  NullityOptions o;
  o.restarts = optional_int(spec, "restarts", path, o.restarts, 1);
  o.sweep = optional_int(spec, "sweep", path, o.sweep, 8);
  o.seed = run.seed + 1;
  return o;
}

Json analyze_single(Run& run) {
  const Json& m = run.m;
  const ImmersionPtr f = immersion_from_json(require(m, "immersion", ""), "/immersion");
  const Grid grid = grid_from_json(require(m, "grid", ""), "/grid");
  const std::size_t k = point_index(m, grid);
  const ImmersionJet jets = sample(f, grid, 3, run.exec);
  CalculusOptions copt;
  copt.tol = run.tolerance();
  copt.exec = run.exec;
  const FundamentalData fd = fundamental_data(jets, copt);
  const Json& expect = expect_of(m);
  const int n = f->dim(), mm = f->ambient().dim();

  Json res;
  res["immersion"] = f->name();
  res["n"] = n;
  res["ambient_dim"] = mm;
  res["codimension"] = mm - n;
  res["grid_points"] = grid.size();
  res["point"] = vec_json(grid.point(k));
  Json fund;
  fund["symmetry"] = fd.symmetry_residual;
  fund["compatibility"] = fd.compatibility_residual;
  fund["shape"] = fd.shape_residual;
  if (jets.source == JetSource::closed_form) fund["gauss"] = gauss_residual(*f, grid.point(k), run.tolerance());
  res["fundamental"] = fund;
  run.le("fundamental.symmetry", fd.symmetry_residual, 1e-8);
  run.le("fundamental.shape", fd.shape_residual, 1e-8);

  if (m.contains("nullity")) {
    const Json& ns = m["nullity"];
    const NullityOptions o = nullity_options(run, ns, "/nullity");
    Json list = Json::array();
    std::vector<int> svals;
    if (ns.contains("s")) {
      const Vec s = get_vector(ns, "s", "/nullity", -1);
      for (Eigen::Index i = 0; i < s.size(); ++i) svals.push_back(static_cast<int>(s(i)));
    } else {
      svals.push_back(1);
    }
    for (int s : svals) {
      const NullityReport nr = conformal_s_nullity(fd, k, f->ambient(), s, o);
      Json e;
      e["s"] = s;
      e["value"] = nr.value;
      e["exact"] = nr.exact;
      e["method"] = nr.method;
      e["restarts"] = nr.restarts;
      e["c"] = vec_json(nr.c);
      list.push_back(e);
      const std::string key = std::to_string(s);
      if (expect.contains("nullity") && expect["nullity"].contains(key))
        run.eq("nullity.s" + key, nr.value, get_int(expect["nullity"], key, "/expect/nullity"));
    }
    res["nullity"] = list;
  }

  if (m.contains("rigidity")) {
    const Json& rs = m["rigidity"];
    const int q = get_int(rs, "q", "/rigidity", 1);
    const RigidityVerdict v = rigidity_criterion(fd, k, f->ambient(), q, nullity_options(run, rs, "/rigidity"));
    Json r;
    r["n"] = v.n;
    r["p"] = v.p;
    r["q"] = v.q;
    Json bounds = Json::array();
    for (const RigidityBound& b : v.bounds) {
      Json e;
      e["s"] = b.s;
      e["bound"] = b.bound;
      e["nullity"] = b.nullity;
      e["exact"] = b.exact;
      e["satisfied"] = b.satisfied;
      bounds.push_back(e);
    }
    r["bounds"] = bounds;
    r["extra_check"] = v.extra_check;
    if (v.extra_check) r["extra_bound"] = v.extra_bound;
    r["hypotheses_hold"] = v.hypotheses_hold;
    r["conclusive"] = v.conclusive;
    res["rigidity"] = r;
    if (expect.contains("rigidity_hypotheses")) {
      const bool want = optional_bool(expect, "rigidity_hypotheses", "/expect", false);
      run.record("rigidity.hypotheses_hold", v.hypotheses_hold, "==", want, v.hypotheses_hold == want);
    }
  }

  if (m.contains("ruling")) {
    const DistributionFrame D = constant_frame(m["ruling"], "directions", "/ruling", grid, run);
    const double thr = optional_double(m["ruling"], "threshold", "/ruling", 1e-6);
    const RulingVerdict v = is_conformally_ruled(jets, D, thr, run.tolerance());
    Json r;
    r["rank"] = D.rank;
    r["ruled"] = v.ruled;
    r["umbilic_residual"] = v.umbilic_residual;
    r["bracket_residual"] = v.bracket_residual;
    if (v.ruled) {
      const ConformalSFF cs = conformal_sff(jets, D, run.tolerance(), run.exec);
      r["ell"] = cs.ell;
      r["nullity_residual"] = cs.nullity_residual;
      if (expect.contains("ell")) run.eq("ruling.ell", cs.ell, get_int(expect, "ell", "/expect"));
    }
    res["ruling"] = r;
    if (expect.contains("ruled")) {
      const bool want = optional_bool(expect, "ruled", "/expect", false);
      run.record("ruling.ruled", v.ruled, "==", want, v.ruled == want);
    }
  }

  run.header = {"index"};
  for (int i = 0; i < n; ++i) run.header.push_back("u" + std::to_string(i + 1));
  for (const char* c : {"metric_det", "alpha_norm", "shape_norm"}) run.header.push_back(c);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double an = 0, sn = 0;
    for (const Mat& A : fd.alpha[j]) an += A.squaredNorm();
    for (const Mat& S : fd.shape_operators[j]) sn += S.squaredNorm();
    std::vector<std::string> row{std::to_string(j)};
    const Vec u = grid.point(j);
    for (int i = 0; i < n; ++i) row.push_back(num(u(i)));
    row.push_back(num(fd.metric[j].determinant()));
    row.push_back(num(std::sqrt(an)));
    row.push_back(num(std::sqrt(sn)));
    run.rows.push_back(std::move(row));
  }
  return res;
}

// --- pairs ------------------------------------------------------------------

PairOptions pair_options(const Run& run, const Json& m) {
  PairOptions o;
  o.tol = run.tolerance();
  o.exec = run.exec;
  if (!m.contains("options")) return o;
  const Json& s = m["options"];
  const std::string path = "/options";
  o.step = optional_double(s, "step", path, o.step);
  o.claim_tolerance = optional_double(s, "claim_tolerance", path, o.claim_tolerance);
  o.metric_tolerance = optional_double(s, "metric_tolerance", path, o.metric_tolerance);
  const std::string b = optional_string(s, "branch", path, "automatic");
  if (b == "automatic") o.branch = Branch::automatic;
  else if (b == "nondegenerate") o.branch = Branch::nondegenerate;
  else if (b == "degenerate") o.branch = Branch::degenerate;
  else throw ManifestError(path + "/branch: expected automatic, nondegenerate or degenerate, got '" + b + "'");
  return o;
}

const char* rank_names[9] = {"omega", "gamma", "gamma_hat", "theta", "S", "S0", "S1", "L", "D"};

Json ranks_json(const std::array<int, 9>& r) {
  Json j;
  for (int i = 0; i < 9; ++i) j[rank_names[i]] = r[i];
  return j;
}

Json bound_json(const PairPipeline& pipe, const ConstructionState& st, const PairPoint& p) {
  const ImmersionPtr& f = pipe.original_left();
  const ImmersionPtr& g = pipe.right();
  const int n = f->dim();
  const int ell = p.L.rank();
  const int d = static_cast<int>(p.D.cols());
  const int s = static_cast<int>(p.Delta.cols());
  Json j;
  try {
    DimensionBound b;
    if (st.branch == Branch::degenerate) {
      const int p_ = f->ambient().dim() - n;
      const int q_ = g->ambient().dim() - n - 2;
      b = check_dimension_bound(BoundKind::isometric_degenerate, n, p_, q_, 0, 0, ell, s);
      j["p"] = p_;
      j["q"] = q_;
    } else {
      const int p_ = f->ambient().dim() - n;
      const int q_ = g->ambient().dim() - n;
      b = check_dimension_bound(BoundKind::isometric_nondegenerate, n, p_, q_, negative_index(f->ambient()),
                                negative_index(g->ambient()), ell, s);
      j["p"] = p_;
      j["q"] = q_;
    }
    j["applicable"] = true;
    j["formula"] = b.formula;
    j["ell"] = ell;
    j["d"] = d;
    j["r"] = s - d;
    j["required"] = b.required;
    j["actual"] = b.actual;
    j["slack"] = b.slack;
    j["exceptional"] = b.exceptional;
  } catch (const HypothesisOutOfRange& e) {
    j["applicable"] = false;
    j["reason"] = e.what();
  }
  return j;
}

Json pair_section(Run& run, const PairPipeline& pipe, const ConstructionState& st, const Json& expect,
                  const std::string& prefix) {
  const Grid& grid = st.grid;
  const int n = grid.dim();
  int errors = 0;
  for (const PairPoint& p : st.points) errors += !p.error.empty();
  Json res;
  res["left"] = pipe.original_left()->name();
  res["right"] = pipe.right()->name();
  res["branch"] = to_string(st.branch);
  res["branch_mismatches"] = st.branch_mismatches;
  res["grid_points"] = grid.size();
  res["errors"] = errors;
  res["frames_built"] = st.frames_built;
  run.eq(prefix + "errors", errors, 0);
  if (expect.contains("branch")) run.eq(prefix + "branch", to_string(st.branch), get_string(expect, "branch", "/expect"));
  if (errors == 0) {
    const C1C2Report c = verify_C1C2(st);
    Json cj;
    cj["sff"] = c.sff;
    cj["parallel"] = c.parallel;
    cj["c2"] = c.c2;
    res["c1c2"] = cj;
    run.le(prefix + "c1c2", c.max(), st.branch == Branch::degenerate ? 1e-6 : 1e-8);
  }

  if (run.region && (*run.region < 0 || static_cast<std::size_t>(*run.region) >= st.regions.size()))
    throw ManifestError("--region: no region " + std::to_string(*run.region) + " (have " +
                        std::to_string(st.regions.size()) + ")");
  res["region_count"] = st.regions.size();
  Json regions = Json::array();
  for (std::size_t ri = 0; ri < st.regions.size(); ++ri) {
    if (run.region && static_cast<std::size_t>(*run.region) != ri) continue;
    const Region& reg = st.regions[ri];
    const std::string rp = prefix + "region[" + std::to_string(ri) + "].";
    const PairPoint& rep = st.points[reg.points.front()];
    Json r;
    r["id"] = ri;
    r["points"] = reg.points.size();
    r["ranks"] = ranks_json(reg.ranks);
    r["representative"] = vec_json(rep.u);
    double star = 0, graph = 0, null = 0, theta = 0, skew = 0;
    bool ok = true;
    for (std::size_t k : reg.points) {
      const PairPoint& p = st.points[k];
      if (!p.error.empty()) {
        ok = false;
        continue;
      }
      star = std::max(star, p.split.star_residual);
      graph = std::max(graph, p.split.graph_residual);
      null = std::max(null, p.split.null_residual);
      theta = std::max(theta, p.theta_identity_residual);
      skew = std::max(skew, p.K_skew_residual);
    }
    Json rs;
    rs["star"] = star;
    rs["graph"] = graph;
    rs["null"] = null;
    rs["theta_identity"] = theta;
    rs["K_skew"] = skew;
    r["residuals"] = rs;
    r["delta_dim"] = rep.Delta.cols();
    if (!ok) {
      r["error"] = "construction failed at some point of the region";
      regions.push_back(r);
      continue;
    }
    if (st.branch == Branch::degenerate) {
      bool c1 = true, c2 = true, c3 = true, c4 = true, inl = true;
      double kth = 0, th0 = 0, pos = 0, jpos = 0, je0 = 0, pairing = 0;
      bool normalized = true;
      for (std::size_t k : reg.points) {
        const PairPoint& p = st.points[k];
        if (!p.claims) continue;
        const ClaimReport& c = *p.claims;
        c1 = c1 && c.claim1;
        c2 = c2 && c.claim2;
        c3 = c3 && c.claim3;
        c4 = c4 && c.claim4;
        inl = inl && c.position_in_L;
        kth = std::max(kth, c.K_theta_residual);
        th0 = std::max(th0, c.th0_residual);
        pos = std::max(pos, c.position_residual);
        jpos = std::max(jpos, c.J_position_residual);
        je0 = std::max(je0, c.J_e0_residual);
        normalized = normalized && p.degeneracy.normalized;
        pairing = std::max(pairing, std::abs(p.degeneracy.position_pairing - 1.0));
      }
      Json cj;
      cj["claim1"] = c1;
      cj["claim2"] = c2;
      cj["claim3"] = c3;
      cj["claim4"] = c4;
      cj["position_in_L"] = inl;
      cj["K_theta"] = kth;
      cj["th0"] = th0;
      cj["position"] = pos;
      cj["J_position"] = jpos;
      cj["J_e0"] = je0;
      cj["xi0_normalized"] = normalized;
      cj["xi0_pairing_error"] = pairing;
      r["claims"] = cj;
      run.truth(rp + "xi0_normalized", normalized);
      run.le(rp + "xi0_pairing_error", pairing, 1e-10);
      run.truth(rp + "claim1", c1);
      run.truth(rp + "claim2", c2);
      run.truth(rp + "claim3", c3);
      run.truth(rp + "claim4", c4);
      run.truth(rp + "position_in_L", inl);
      run.le(rp + "K_theta", kth, 1e-6);
      run.le(rp + "th0", th0, 1e-6);
    }
    const Json b = bound_json(pipe, st, rep);
    r["bound"] = b;
    if (b["applicable"].get<bool>()) run.ge(rp + "bound_slack", b["slack"].get<double>(), 0.0);
    if (expect.contains("ranks")) {
      const Json& er = expect["ranks"];
      for (int i = 0; i < 9; ++i)
        if (er.contains(rank_names[i]))
          run.eq(rp + "rank." + rank_names[i], reg.ranks[i], get_int(er, rank_names[i], "/expect/ranks"));
    }
    if (optional_bool(expect, "D_is_TM", "/expect", false)) run.eq(rp + "D_is_TM", reg.ranks[8], n);
    regions.push_back(r);
  }
  res["regions"] = regions;

  run.header = {"index"};
  for (int i = 0; i < n; ++i) run.header.push_back("u" + std::to_string(i + 1));
  run.header.push_back("branch");
  for (const char* c : rank_names) run.header.push_back(c);
  for (const char* c : {"delta", "c1_sff", "c1_parallel", "c2", "star", "error"}) run.header.push_back(c);
  run.rows.clear();
  for (std::size_t k = 0; k < st.points.size(); ++k) {
    const PairPoint& p = st.points[k];
    std::vector<std::string> row{std::to_string(k)};
    for (int i = 0; i < n; ++i) row.push_back(num(p.u(i)));
    row.push_back(to_string(p.branch));
    for (int r : p.ranks()) row.push_back(std::to_string(r));
    row.push_back(std::to_string(p.Delta.cols()));
    row.push_back(num(p.c1_sff_residual));
    row.push_back(num(p.c1_parallel_residual));
    row.push_back(num(p.c2_residual));
    row.push_back(num(p.split.star_residual));
    row.push_back(p.error.empty() ? "" : "\"" + p.error + "\"");
    run.rows.push_back(std::move(row));
  }
  return res;
}

Json analyze_pair(Run& run) {
  const ImmersionPtr f = immersion_from_json(require(run.m, "left", ""), "/left");
  const ImmersionPtr g = immersion_from_json(require(run.m, "right", ""), "/right");
  const Grid grid = grid_from_json(require(run.m, "grid", ""), "/grid");
  const PairPipeline pipe(f, g, pair_options(run, run.m));
  const ConstructionState st = construct_TD(pipe, grid);
  return pair_section(run, pipe, st, expect_of(run.m), "");
}

Json report_extension(const ExtensionReport& r, const Extension& ext) {
  Json j;
  j["r"] = ext.r;
  j["radius"] = ext.radius;
  j["halvings"] = ext.halvings;
  j["trivial"] = r.trivial;
  j["zero_section_exact"] = r.zero_section_exact;
  j["straightness"] = r.straightness;
  j["metric"] = r.metric_residual;
  j["inc"] = r.inc_residual;
  j["inter"] = r.inter_residual;
  j["transfer"] = r.transfer_residual;
  j["position"] = r.position_residual;
  j["bracket"] = r.bracket_residual;
  j["min_metric_eigenvalue"] = r.min_metric_eigenvalue;
  return j;
}

Json analyze_extend(Run& run) {
  const ImmersionPtr f = immersion_from_json(require(run.m, "left", ""), "/left");
  const ImmersionPtr g = immersion_from_json(require(run.m, "right", ""), "/right");
  const Grid grid = grid_from_json(require(run.m, "grid", ""), "/grid");
  const PairPipeline pipe(f, g, pair_options(run, run.m));
  const ConstructionState st = construct_TD(pipe, grid);
  Json res = pair_section(run, pipe, st, expect_of(run.m), "");
  const DeltaField df = phi_obstruction(st);
  Json dj;
  dj["dim"] = df.dim;
  dj["d"] = df.d;
  dj["r"] = df.r;
  dj["ell"] = df.ell;
  dj["phi_norm"] = df.phi_norm;
  res["delta"] = dj;
  run.le("delta.phi_norm", df.phi_norm, 1e-8);

  ExtensionOptions xo;
  xo.exec = run.exec;
  if (run.m.contains("extension")) {
    const Json& x = run.m["extension"];
    xo.radius_fraction = optional_double(x, "radius_fraction", "/extension", xo.radius_fraction);
    xo.max_halvings = optional_int(x, "max_halvings", "/extension", xo.max_halvings, 0);
    xo.step = optional_double(x, "step", "/extension", xo.step);
  }
  const Extension ext = ruled_extension(pipe, st, df, xo);
  const ExtensionReport rep = verify_extension(ext, st);
  res["extension"] = report_extension(rep, ext);
  run.truth("extension.zero_section_exact", rep.zero_section_exact);
  run.le("extension.straightness", rep.straightness, 1e-12);
  run.le("extension.metric", rep.metric_residual, 1e-6);
  run.le("extension.inc", rep.inc_residual, 1e-6);
  run.le("extension.inter", rep.inter_residual, 1e-6);
  run.le("extension.transfer", rep.transfer_residual, 1e-6);
  if (st.branch == Branch::degenerate) run.le("extension.position", rep.position_residual, 1e-6);

  if (optional_bool(run.m, "negative_controls", "", false)) {
    Json nc;
    ExtensionOptions bad = xo;
    bad.corrupt_delta = true;
    try {
      const ExtensionReport r1 = verify_extension(ruled_extension(pipe, st, df, bad), st);
      nc["inc"] = r1.inc_residual;
      run.ge("control.inc", r1.inc_residual, 1e-3);
    } catch (const HypothesisOutOfRange& e) {
      nc["inc"] = std::string("not applicable: ") + e.what();
    }
    const PairPoint& p = st.points[grid.center()];
    if (p.D.cols() < grid.dim()) {
      // First chart direction outside D, adjoined to Delta.
      const Mat P = Mat::Identity(grid.dim(), grid.dim()) - p.D * p.D.transpose();
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < P.cols(); ++i)
        if (P.col(i).norm() > P.col(best).norm() + 1e-12) best = i;
      Mat bent(p.Delta.rows(), p.Delta.cols() + 1);
      bent << p.Delta, Vec::Unit(p.Delta.rows(), best);
      const double v = delta_tm_residual(bent, p.D, run.tolerance());
      nc["inter"] = v;
      run.ge("control.inter", v, 1e-3);
    } else {
      nc["inter"] = "not applicable: D = TM";
    }
    ExtensionOptions flip = xo;
    flip.corrupt_transfer = true;
    const ExtensionReport r2 = verify_extension(ruled_extension(pipe, st, df, flip), st);
    nc["transfer_metric"] = r2.metric_residual;
    if (ext.r > 0) run.ge("control.transfer_metric", r2.metric_residual, 1e-3);
    res["negative_controls"] = nc;
  }
  return res;
}

Json analyze_generate(Run& run) {
  const ImmersionPtr Fp = immersion_from_json(require(run.m, "F_prime", ""), "/F_prime");
  const ImmersionPtr Fh = immersion_from_json(require(run.m, "F_hat", ""), "/F_hat");
  const Grid grid = grid_from_json(require(run.m, "grid", ""), "/grid");
  SliceOptions so;
  so.exec = run.exec;
  if (run.m.contains("slice")) {
    const Json& s = run.m["slice"];
    so.axis = optional_int(s, "axis", "/slice", so.axis, 0);
    so.lo = optional_double(s, "lo", "/slice", so.lo);
    so.hi = optional_double(s, "hi", "/slice", so.hi);
    so.samples = optional_int(s, "samples", "/slice", so.samples, 2);
  }
  const SliceData sd = generate_conformal_pair(Fp, Fh, grid, so);
  Json res;
  Json sj;
  sj["grid_points"] = grid.size();
  sj["root_min"] = *std::min_element(sd.roots.begin(), sd.roots.end());
  sj["root_max"] = *std::max_element(sd.roots.begin(), sd.roots.end());
  sj["level_residual"] = *std::max_element(sd.level_residual.begin(), sd.level_residual.end());
  sj["min_gradient"] = *std::min_element(sd.gradient.begin(), sd.gradient.end());
  sj["transversal"] = sd.transversal;
  sj["factor_residual"] = sd.factor.residual;
  res["slice"] = sj;
  run.truth("slice.transversal", sd.transversal);
  run.le("slice.level_residual", sj["level_residual"].get<double>(), 1e-10);
  run.le("slice.factor_residual", sd.factor.residual, 1e-6);
  if (run.m.contains("expect") && run.m["expect"].contains("root")) {
    // Root expected as a linear function of the slice coordinates: t = c0 + c . x.
    const Vec c = get_vector(run.m["expect"], "root", "/expect", grid.dim() + 1);
    double err = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      err = std::max(err, std::abs(sd.roots[k] - c(0) - c.tail(grid.dim()).dot(grid.point(k))));
    sj["root_error"] = err;
    res["slice"] = sj;
    run.le("slice.root_error", err, 1e-10);
  }
  if (optional_bool(run.m, "pair", "", true)) {
    const PairPipeline pipe(sd.f, sd.f_cone, pair_options(run, run.m));
    const ConstructionState st = construct_TD(pipe, grid);
    res["pair"] = pair_section(run, pipe, st, expect_of(run.m), "pair.");
  } else {
    run.header = {"index"};
    for (int i = 0; i < grid.dim(); ++i) run.header.push_back("u" + std::to_string(i + 1));
    for (const char* c : {"root", "level_residual", "gradient", "phi"}) run.header.push_back(c);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<std::string> row{std::to_string(k)};
      const Vec u = grid.point(k);
      for (int i = 0; i < grid.dim(); ++i) row.push_back(num(u(i)));
      row.push_back(num(sd.roots[k]));
      row.push_back(num(sd.level_residual[k]));
      row.push_back(num(sd.gradient[k]));
      row.push_back(num(sd.factor.phi[k]));
      run.rows.push_back(std::move(row));
    }
  }
  return res;
}

std::string csv_text(const Run& run) {
  std::ostringstream os;
  for (std::size_t i = 0; i < run.header.size(); ++i) os << (i ? "," : "") << run.header[i];
  if (!run.header.empty()) os << "\n";
  for (const auto& row : run.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

} // namespace

RunResult run_manifest(const Json& manifest, const RunOverrides& overrides) {
  if (!manifest.is_object()) throw ManifestError("/: expected an object");
  const std::string name = get_string(manifest, "name", "");
  const std::string kind = get_string(manifest, "analysis", "");
  Run run{manifest, 1e-9, 0, default_exec(), std::nullopt, Json::array(), true, {}, {}};
  run.tol = overrides.tolerance ? *overrides.tolerance : optional_double(manifest, "tolerance", "", 1e-9);
  if (!(run.tol > 0.0 && run.tol <= 1e-3))
    throw ManifestError(std::string(overrides.tolerance ? "--tolerance" : "/tolerance") + ": must lie in (0, 1e-3]");
  if (overrides.seed) {
    run.seed = *overrides.seed;
  } else if (manifest.contains("seed")) {
    if (!manifest["seed"].is_number_unsigned()) throw ManifestError("/seed: expected a non-negative integer");
    run.seed = manifest["seed"].get<std::uint64_t>();
  }
  run.region = overrides.region;
  if (overrides.exec) run.exec = *overrides.exec;

  Json results;
  if (kind == "lightcone") results = analyze_lightcone(run);
  else if (kind == "single") results = analyze_single(run);
  else if (kind == "pair") results = analyze_pair(run);
  else if (kind == "extend") results = analyze_extend(run);
  else if (kind == "generate") results = analyze_generate(run);
  else throw ManifestError("/analysis: expected one of single, lightcone, pair, generate, extend, got '" + kind + "'");

  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(manifest.dump())));
  Json prov;
  prov["manifest_hash"] = std::string("fnv1a64:") + hash;
  prov["version"] = version_string();
  prov["tolerance"] = run.tol;
  prov["seed"] = run.seed;
  if (run.region) prov["region"] = *run.region;

  RunResult out;
  out.report["name"] = name;
  out.report["analysis"] = kind;
  if (manifest.contains("description")) out.report["description"] = manifest["description"];
  out.report["provenance"] = prov;
  out.report["results"] = std::move(results);
  out.report["checks"] = run.checks;
  out.report["verdict"] = run.pass ? "pass" : "fail";
  out.passed = run.pass;
  out.csv = csv_text(run);
  return out;
}

} // namespace cdef
