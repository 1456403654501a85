#include "errplan/bnb.hpp"

#include "errplan/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <queue>
#include <thread>
#include <vector>

namespace errplan {

const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::feasible: return "feasible";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::unbounded: return "unbounded";
    default: return "limit";
  }
}

const char* to_string(BranchingRule r) {
  switch (r) {
    case BranchingRule::class_priority: return "class_priority";
    case BranchingRule::status_first: return "status_first";
    default: return "most_fractional";
  }
}

BranchingRule branching_rule_from(const std::string& s) {
  if (s == "most_fractional") return BranchingRule::most_fractional;
  if (s == "class_priority") return BranchingRule::class_priority;
  if (s == "status_first") return BranchingRule::status_first;
  throw ValidationError("unknown branching rule '" + s + "'");
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  if (!std::isfinite(bound)) return kInf;
  return (incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

namespace {

struct Node {
  long id = 0;
  double bound = -kInf;
  int depth = 0;
  std::vector<double> lower, upper;  // bounds of the integer variables only
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct Outcome {
  bool failed = false;
  std::string what, diagnostics;
  RelaxResult relax;
};

class BranchAndBound {
 public:
  BranchAndBound(const ConicProgram& program, const BnBConfig& config, ContinuousBackend& backend)
      : prog_(program), cfg_(config), backend_(backend) {
    for (int i = 0; i < prog_.num_variables(); ++i)
      if (prog_.variable(i).kind != Integrality::continuous) ints_.push_back(i);
    base_lower_.reserve(prog_.variables().size());
    base_upper_.reserve(prog_.variables().size());
    for (const auto& v : prog_.variables()) {
      base_lower_.push_back(v.lower);
      base_upper_.push_back(v.upper);
    }
  }

  MipSolution run() {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    if (cfg_.hint) try_incumbent(*cfg_.hint);

    Node root;
    root.id = next_id_++;
    for (int i : ints_) {
      root.lower.push_back(std::ceil(base_lower_[static_cast<size_t>(i)] - cfg_.integrality_tol));
      root.upper.push_back(std::floor(base_upper_[static_cast<size_t>(i)] + cfg_.integrality_tol));
    }
    open_.push(std::move(root));

    bool limit_hit = false;
    bool unbounded = false;
    double best_closed_bound = kInf;  // smallest bound among nodes dropped by limits
    const int batch = std::max(1, cfg_.threads);
    while (!open_.empty()) {
      if (incumbent_ok_ && relative_gap(incumbent_obj_, open_.top().bound) <= cfg_.gap) break;
      if (nodes_ >= cfg_.node_limit || (cfg_.time_limit > 0 && elapsed() > cfg_.time_limit)) {
        limit_hit = true;
        break;
      }
      std::vector<Node> work;
      while (!open_.empty() && static_cast<int>(work.size()) < batch) {
        Node n = open_.top();
        open_.pop();
        if (incumbent_ok_ && relative_gap(incumbent_obj_, n.bound) <= cfg_.gap) continue;
        work.push_back(std::move(n));
      }
      if (work.empty()) continue;
      std::vector<Outcome> results(work.size());
      if (work.size() == 1) {
        results[0] = evaluate(work[0]);
      } else {
        std::vector<std::thread> pool;
        for (size_t k = 0; k < work.size(); ++k) pool.emplace_back([&, k] { results[k] = evaluate(work[k]); });
        for (auto& t : pool) t.join();
      }
      for (size_t k = 0; k < work.size(); ++k) {
        ++nodes_;
        if (results[k].failed) fail(work[k], results[k]);
        if (process(work[k], results[k].relax)) unbounded = true;
        if (unbounded) break;
        if (cfg_.progress && nodes_ % cfg_.log_every == 0)
          cfg_.progress(nodes_, incumbent_obj_, open_.empty() ? incumbent_obj_ : open_.top().bound);
      }
      if (unbounded) break;
    }

    MipSolution sol;
    sol.node_count = nodes_;
    sol.seconds = elapsed();
    if (unbounded) {
      sol.status = MipStatus::unbounded;
      return sol;
    }
    double bound = open_.empty() ? kInf : open_.top().bound;
    bound = std::min(bound, best_closed_bound);
    if (incumbent_ok_) {
      sol.x = incumbent_;
      sol.objective = incumbent_obj_;
      sol.bound = std::min(bound, incumbent_obj_);
      sol.gap = relative_gap(sol.objective, sol.bound);
      sol.status = sol.gap <= cfg_.gap ? MipStatus::optimal : (limit_hit ? MipStatus::feasible : MipStatus::optimal);
    } else {
      sol.status = limit_hit ? MipStatus::limit : MipStatus::infeasible;
      sol.bound = limit_hit ? bound : kInf;
    }
    return sol;
  }

 private:
  std::vector<double> full_bounds(const std::vector<double>& base, const std::vector<double>& ints) const {
    std::vector<double> out = base;
    for (size_t k = 0; k < ints_.size(); ++k) out[static_cast<size_t>(ints_[k])] = ints[k];
    return out;
  }

  Outcome evaluate(const Node& n) const {
    Outcome o;
    try {
      o.relax = backend_.solve(prog_, full_bounds(base_lower_, n.lower), full_bounds(base_upper_, n.upper));
    } catch (const NumericalFailure& e) {
      o.failed = true;
      o.what = e.what();
      o.diagnostics = e.diagnostics();
    }
    return o;
  }

  [[noreturn]] void fail(const Node& n, const Outcome& o) const {
    ConicProgram sub = prog_;
    const auto lo = full_bounds(base_lower_, n.lower);
    const auto up = full_bounds(base_upper_, n.upper);
    for (int i = 0; i < sub.num_variables(); ++i) {
      sub.variable(i).lower = lo[static_cast<size_t>(i)];
      sub.variable(i).upper = up[static_cast<size_t>(i)];
    }
    if (!cfg_.dump_node_path.empty()) {
      std::ofstream f(cfg_.dump_node_path);
      f << sub.to_json().dump(1) << "\n";
    }
    throw NumericalFailure(o.what + " at node " + std::to_string(n.id),
                           o.diagnostics + "\nnode: " + std::to_string(n.id) +
                               (cfg_.dump_node_path.empty() ? "" : "\ndumped to " + cfg_.dump_node_path));
  }

  // Returns true when the relaxation is unbounded.
  bool process(const Node& n, const RelaxResult& r) {
    if (r.status == RelaxStatus::infeasible) return false;
    if (r.status == RelaxStatus::unbounded) return true;
    if (incumbent_ok_ && relative_gap(incumbent_obj_, r.objective) <= cfg_.gap) return false;

    // Branching candidate.
    int pick = -1;
    double pick_frac = -1.0;
    for (size_t k = 0; k < ints_.size(); ++k) {
      const double v = r.x(ints_[k]);
      const double frac = std::abs(v - std::round(v));
      if (frac <= cfg_.integrality_tol) continue;
      if (pick < 0 || better_candidate(static_cast<int>(k), frac, pick, pick_frac)) {
        pick = static_cast<int>(k);
        pick_frac = frac;
      }
    }
    if (pick < 0) {
      try_incumbent(r.x);
      return false;
    }
    if (n.depth == 0) try_incumbent(r.x);

    const double v = r.x(ints_[static_cast<size_t>(pick)]);
    Node down = n, up = n;
    down.id = next_id_++;
    up.id = next_id_++;
    down.depth = up.depth = n.depth + 1;
    down.bound = up.bound = std::max(n.bound, r.objective);
    down.upper[static_cast<size_t>(pick)] = std::floor(v);
    up.lower[static_cast<size_t>(pick)] = std::ceil(v);
    if (down.lower[static_cast<size_t>(pick)] <= down.upper[static_cast<size_t>(pick)]) open_.push(std::move(down));
    if (up.lower[static_cast<size_t>(pick)] <= up.upper[static_cast<size_t>(pick)]) open_.push(std::move(up));
    return false;
  }

  bool better_candidate(int k, double frac, int cur, double cur_frac) const {
    const int ck = static_cast<int>(prog_.variable(ints_[static_cast<size_t>(k)]).branch_class);
    const int cc = static_cast<int>(prog_.variable(ints_[static_cast<size_t>(cur)]).branch_class);
    if (cfg_.branching == BranchingRule::status_first) {
      // mer, line, crew, other
      static constexpr int rank[] = {2, 1, 0, 3};
      if (ck != cc) return rank[ck] < rank[cc];
      if (std::abs(frac - cur_frac) > cfg_.tie_tol) return frac > cur_frac;
      return k < cur;
    }
    if (cfg_.branching == BranchingRule::class_priority) {
      if (ck != cc) return ck < cc;
      if (std::abs(frac - cur_frac) > cfg_.tie_tol) return frac > cur_frac;
      return k < cur;
    }
    if (std::abs(frac - cur_frac) > cfg_.tie_tol) return frac > cur_frac;
    if (ck != cc) return ck < cc;
    return k < cur;
  }

  void try_incumbent(const Eigen::VectorXd& x) {
    std::optional<RelaxResult> r;
    try {
      r = repair_integer_point(prog_, x, &backend_);
    } catch (const NumericalFailure&) {
      return;  // a heuristic failure is not fatal
    }
    if (!r) return;
    if (!incumbent_ok_ || r->objective < incumbent_obj_) {
      incumbent_ok_ = true;
      incumbent_obj_ = r->objective;
      incumbent_ = r->x;
    }
  }

  const ConicProgram& prog_;
  const BnBConfig& cfg_;
  ContinuousBackend& backend_;
  std::vector<int> ints_;
  std::vector<double> base_lower_, base_upper_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open_;
  long next_id_ = 0;
  long nodes_ = 0;
  bool incumbent_ok_ = false;
  double incumbent_obj_ = kInf;
  Eigen::VectorXd incumbent_;
};

}  // namespace

std::optional<RelaxResult> repair_integer_point(const ConicProgram& program, const Eigen::VectorXd& x,
                                                ContinuousBackend* backend) {
  IpmBackend fallback;
  ContinuousBackend& be = backend ? *backend : fallback;
  std::vector<double> lo, up;
  for (int i = 0; i < program.num_variables(); ++i) {
    const auto& v = program.variable(i);
    if (v.kind == Integrality::continuous) {
      lo.push_back(v.lower);
      up.push_back(v.upper);
    } else {
      const double r = std::clamp(std::round(x(i)), v.lower, v.upper);
      lo.push_back(r);
      up.push_back(r);
    }
  }
  RelaxResult r = be.solve(program, lo, up);
  if (r.status != RelaxStatus::optimal) return std::nullopt;
  for (int i = 0; i < program.num_variables(); ++i)
    if (program.variable(i).kind != Integrality::continuous) r.x(i) = lo[static_cast<size_t>(i)];
  r.objective = program.evaluate_objective(r.x);
  return r;
}

MipSolution solve_michp(const ConicProgram& program, const BnBConfig& config, ContinuousBackend* backend) {
  if (!(config.gap > 0)) throw ValidationError("BnBConfig.gap must be positive");
  program.validate();
  IpmBackend fallback;
  BranchAndBound bb(program, config, backend ? *backend : fallback);
  return bb.run();
}

}  // namespace errplan
