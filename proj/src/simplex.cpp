#include "pivotforge/simplex.hpp"

#include "pivotforge/linear_solve.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace pf {

void validate_lp(const LinearProgram& lp) {
  const std::size_t m = lp.rows(), n = lp.cols();
  if (lp.b.size() != m) throw LpError("b has wrong length");
  for (const auto& row : lp.a)
    if (row.size() != n) throw LpError("A has a row of wrong length");
  if (m > n) throw LpError("more constraints than variables");
  if (matrix_rank(lp.a) != m) throw LpError("A does not have full row rank");
}

namespace {

RationalMatrix basis_matrix(const LinearProgram& lp, const Basis& basis) {
  const std::size_t m = lp.rows();
  if (basis.indices.size() != m) throw LpError("basis has wrong size");
  RationalMatrix ab(m, RationalVector(m));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t k = 0; k < m; ++k) ab[r][k] = lp.a[r].at(basis.indices[k]);
  return ab;
}

RationalMatrix transpose(const RationalMatrix& a) {
  if (a.empty()) return a;
  RationalMatrix t(a[0].size(), RationalVector(a.size()));
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c) t[c][r] = a[r][c];
  return t;
}

RationalVector column(const LinearProgram& lp, int j) {
  RationalVector col(lp.rows());
  for (std::size_t r = 0; r < lp.rows(); ++r) col[r] = lp.a[r][j];
  return col;
}

}  // namespace

LpState::LpState(const LinearProgram& lp, Basis basis) : lp_(&lp), basis_(std::move(basis)) {
  std::sort(basis_.indices.begin(), basis_.indices.end());
  ab_ = basis_matrix(lp, basis_);
  const std::size_t m = lp.rows();
  RationalVector cb(m);
  for (std::size_t k = 0; k < m; ++k) cb[k] = lp.c[basis_.indices[k]];
  RationalVector xb, y;
  try {
    xb = solve_linear(ab_, lp.b);
    y = solve_linear(transpose(ab_), cb);
  } catch (const SingularMatrix&) {
    throw LpError("singular basis");
  }
  x_.assign(lp.cols(), Rational(0));
  for (std::size_t k = 0; k < m; ++k) x_[basis_.indices[k]] = xb[k];
  rc_.assign(lp.cols(), Rational(0));
  std::vector<char> basic(lp.cols(), 0);
  for (int j : basis_.indices) basic[j] = 1;
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    if (basic[j]) continue;
    Rational v = lp.c[j];
    for (std::size_t r = 0; r < m; ++r) v -= y[r] * lp.a[r][j];
    rc_[j] = v;
  }
}

Rational LpState::objective() const {
  Rational total = 0;
  for (std::size_t j = 0; j < x_.size(); ++j) total += lp_->c[j] * x_[j];
  return total;
}

bool LpState::feasible() const {
  return std::all_of(x_.begin(), x_.end(), [](const Rational& v) { return v >= 0; });
}

bool LpState::nondegenerate() const {
  return std::all_of(basis_.indices.begin(), basis_.indices.end(), [&](int j) { return x_[j] > 0; });
}

std::vector<int> LpState::improving() const {
  std::vector<int> out;
  for (std::size_t j = 0; j < rc_.size(); ++j)
    if (rc_[j] > 0) out.push_back(static_cast<int>(j));
  return out;
}

const RationalVector& LpState::direction(int entering) const {
  auto it = directions_.find(entering);
  if (it != directions_.end()) return it->second;
  RationalVector d = solve_linear(ab_, column(*lp_, entering));
  RationalVector delta(lp_->cols(), Rational(0));
  delta[entering] = 1;
  for (std::size_t k = 0; k < d.size(); ++k) delta[basis_.indices[k]] = -d[k];
  return directions_.emplace(entering, std::move(delta)).first->second;
}

Rational LpState::step_length(int entering, int* leaving) const {
  const auto& delta = direction(entering);
  std::optional<Rational> best;
  int arg = -1;
  bool tie = false;
  for (int j : basis_.indices) {
    if (delta[j] >= 0) continue;
    Rational ratio = x_[j] / -delta[j];
    if (!best || ratio < *best) {
      best = ratio;
      arg = j;
      tie = false;
    } else if (ratio == *best) {
      tie = true;
    }
  }
  if (!best) throw UnboundedDirection();
  if (tie || *best == 0) throw DegenerateStep();
  if (leaving) *leaving = arg;
  return *best;
}

Basis LpState::neighbor(int entering) const {
  int leaving = -1;
  step_length(entering, &leaving);
  Basis next = basis_;
  std::replace(next.indices.begin(), next.indices.end(), leaving, entering);
  std::sort(next.indices.begin(), next.indices.end());
  return next;
}

BasicSolution bfs_from_basis(const LinearProgram& lp, const Basis& basis) {
  LpState st(lp, basis);
  return {st.x(), st.feasible()};
}

RationalVector reduced_costs(const LinearProgram& lp, const Basis& basis) { return LpState(lp, basis).reduced_costs(); }

Basis pivot(const LinearProgram& lp, const Basis& basis, int entering) {
  LpState st(lp, basis);
  if (!st.feasible()) throw LpError("pivot from an infeasible basis");
  if (entering < 0 || entering >= static_cast<int>(lp.cols()) || st.reduced_costs()[entering] <= 0)
    throw LpError("entering index is not improving");
  return st.neighbor(entering);
}

Rational brute_force_optimum(const LinearProgram& lp) {
  const int m = static_cast<int>(lp.rows()), n = static_cast<int>(lp.cols());
  if (n > 24) throw LpError("too large for enumeration");
  std::optional<Rational> best;
  std::vector<int> pick(m);
  for (int i = 0; i < m; ++i) pick[i] = i;
  while (true) {
    try {
      LpState st(lp, Basis{pick});
      if (st.feasible() && (!best || st.objective() > *best)) best = st.objective();
    } catch (const LpError&) {
    }
    int i = m - 1;
    while (i >= 0 && pick[i] == n - m + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int k = i + 1; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  if (!best) throw LpError("no feasible basis");
  return *best;
}

namespace {

class LpSource : public RankingSource {
 public:
  LpSource(const LinearProgram& lp, const LpState& st, std::vector<ElementId> improving)
      : lp_(lp), st_(st), improving_(std::move(improving)) {}

  const std::vector<ElementId>& improving() const override { return improving_; }
  Rational reduced_cost(ElementId e) const override { return st_.reduced_costs()[e - 1]; }
  Rational objective_after(ElementId e) const override {
    int j = static_cast<int>(e - 1);
    return st_.objective() + st_.reduced_costs()[j] * st_.step_length(j);
  }
  Rational steepest_edge_score(ElementId e) const override {
    const auto& delta = st_.direction(static_cast<int>(e - 1));
    Rational gain = 0, norm = 0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      gain += lp_.c[j] * delta[j];
      norm += delta[j] * delta[j];
    }
    if (norm == 0) throw LpError("zero-length edge");
    Rational sq = gain * gain / norm;
    return gain < 0 ? Rational(-sq) : sq;
  }
  Rational shadow_vertex_score(ElementId e, const RationalVector& d) const override {
    if (d.size() != lp_.cols()) throw LpError("shadow objective has wrong length");
    const auto& delta = st_.direction(static_cast<int>(e - 1));
    Rational num = 0, den = 0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      num += d[j] * delta[j];
      den += lp_.c[j] * delta[j];
    }
    if (den == 0) throw LpError("zero-length edge");
    return num / den;
  }

 private:
  const LinearProgram& lp_;
  const LpState& st_;
  std::vector<ElementId> improving_;
};

std::vector<long long> basis_state(const Basis& b) {
  std::vector<long long> out;
  for (int j : b.indices) out.push_back(j + 1);
  return out;
}

}  // namespace

RunTrace simplex(const LinearProgram& lp, const Basis& basis0, const PivotRule& rule, const SimplexRunOptions& options) {
  validate_lp(lp);
  RunTrace trace;
  trace.engine = "simplex";
  trace.rule = rule.name;
  trace.element_count = static_cast<long long>(lp.cols());

  LpState st(lp, basis0);
  if (!st.feasible()) throw LpError("initial basis is infeasible");
  int memory = 1;
  auto summary = [&](const LpState& s) {
    return options.record_objective ? format_rational(s.objective()) : std::string();
  };
  while (true) {
    if (options.check_invariants) {
      if (!st.nondegenerate()) throw DegenerateStep();
    }
    auto imp = st.improving();
    std::map<std::string, std::string> marks;
    if (options.record_reduced_costs) {
      std::string row;
      for (const auto& r : st.reduced_costs()) {
        if (!row.empty()) row += " ";
        row += format_rational(r);
      }
      marks["rc"] = row;
    }
    if (options.observer) options.observer(st, imp, marks);
    if (imp.empty() || trace.steps.size() >= options.cap) {
      trace.complete = imp.empty();
      trace.terminal = {hash_state(basis_state(st.basis())), summary(st), basis_state(st.basis()), std::move(marks)};
      break;
    }
    std::vector<ElementId> ids;
    for (int j : imp) ids.push_back(j + 1);
    LpSource src(lp, st, ids);
    Choice c = choose(rule, src, trace.element_count, memory);

    TraceStep step;
    step.state_hash = hash_state(basis_state(st.basis()));
    step.improving = ids;
    step.ranks = std::move(c.ranks);
    step.chosen = c.element;
    step.chosen_rank = c.rank;
    step.memory = memory;
    step.objective = summary(st);
    step.diverged = c.diverged;
    step.marks = std::move(marks);
    trace.steps.push_back(std::move(step));

    Basis next = st.neighbor(static_cast<int>(c.element - 1));
    LpState nst(lp, next);
    if (options.check_invariants) {
      if (!nst.feasible()) throw LpError("pivot produced an infeasible basis");
      if (!(nst.objective() > st.objective())) throw DegenerateStep();
    }
    st = std::move(nst);
    memory = c.next_memory;
  }
  return trace;
}

using nlohmann::json;

std::string lp_to_json(const LinearProgram& lp, const Basis* basis) {
  auto vec = [](const RationalVector& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(format_rational(x));
    return out;
  };
  json a = json::array();
  for (const auto& row : lp.a) a.push_back(vec(row));
  json j = {{"A", a}, {"b", vec(lp.b)}, {"c", vec(lp.c)}};
  if (basis) {
    json idx = json::array();
    for (int k : basis->indices) idx.push_back(k + 1);
    j["basis"] = idx;
  }
  return j.dump(1) + "\n";
}

LinearProgram lp_from_json(const std::string& text, std::optional<Basis>* basis) {
  json j = json::parse(text);
  auto vec = [](const json& v) {
    RationalVector out;
    for (const auto& x : v) out.push_back(x.is_string() ? parse_rational(x.get<std::string>()) : Rational(x.get<long long>()));
    return out;
  };
  LinearProgram lp;
  for (const auto& row : j.at("A")) lp.a.push_back(vec(row));
  lp.b = vec(j.at("b"));
  lp.c = vec(j.at("c"));
  validate_lp(lp);
  if (basis) {
    basis->reset();
    if (j.contains("basis")) {
      Basis b;
      for (const auto& k : j.at("basis")) b.indices.push_back(k.get<int>() - 1);
      std::sort(b.indices.begin(), b.indices.end());
      *basis = b;
    }
  }
  return lp;
}

std::string lp_to_text(const LinearProgram& lp) {
  std::ostringstream out;
  out << "maximize";
  for (std::size_t j = 0; j < lp.cols(); ++j) out << " " << format_rational(lp.c[j]) << "*x" << j + 1;
  out << "\nsubject to\n";
  for (std::size_t r = 0; r < lp.rows(); ++r) {
    for (std::size_t j = 0; j < lp.cols(); ++j)
      if (lp.a[r][j] != 0) out << " " << format_rational(lp.a[r][j]) << "*x" << j + 1;
    out << " = " << format_rational(lp.b[r]) << "\n";
  }
  out << "x >= 0\n";
  return out.str();
}

}  // namespace pf
