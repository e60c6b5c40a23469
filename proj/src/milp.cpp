#include "softsensor/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "softsensor/error.hpp"
#include "softsensor/format.hpp"

namespace softsensor {

void MixedIntegerProgram::validate() const {
  base.validate();
  std::vector<bool> seen(base.num_vars(), false);
  for (std::size_t v : binary_vars) {
    if (v >= base.num_vars())
      throw validation_error("MILP: binary index " + std::to_string(v) + " out of range");
    if (seen[v]) throw validation_error("MILP: binary index " + std::to_string(v) + " repeated");
    seen[v] = true;
  }
}

std::string to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "Optimal";
    case MipStatus::Feasible: return "Feasible";
    case MipStatus::Infeasible: return "Infeasible";
    case MipStatus::TimedOut: return "TimedOut";
  }
  return "?";
}

double max_violation(const MixedIntegerProgram& prob, const Vector& values) {
  const auto& lp = prob.base;
  if (values.size() != lp.num_vars()) return kInf;
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - values[j]);
    worst = std::max(worst, values[j] - lp.upper[j]);
  }
  for (const auto& c : lp.constraints) {
    double act = 0.0;
    for (const auto& e : c.row) act += e.value * values[e.index];
    if (c.sense != Sense::GreaterEqual) worst = std::max(worst, act - c.rhs);
    if (c.sense != Sense::LessEqual) worst = std::max(worst, c.rhs - act);
  }
  for (std::size_t v : prob.binary_vars)
    worst = std::max(worst, std::min(std::abs(values[v]), std::abs(values[v] - 1.0)));
  return worst;
}

namespace {

constexpr double kIntegralityTol = 1e-6;

struct Node {
  std::size_t id = 0;
  double bound = -kInf;
  std::vector<std::pair<std::size_t, double>> fixes;
  Basis basis;
};

// Min-heap on (bound, id) so ties resolve by creation order.
bool heap_after(const Node& a, const Node& b) {
  if (a.bound != b.bound) return a.bound > b.bound;
  return a.id > b.id;
}

class BranchAndBound {
 public:
  BranchAndBound(const MixedIntegerProgram& prob, const MipOptions& opts)
      : prob_(prob), opts_(opts), relaxed_(prob.base) {
    for (std::size_t v : prob.binary_vars) {
      relaxed_.lower[v] = std::max(relaxed_.lower[v], 0.0);
      relaxed_.upper[v] = std::min(relaxed_.upper[v], 1.0);
    }
    engine_.emplace(relaxed_);
    start_ = std::chrono::steady_clock::now();
  }

  MipResult run() {
    MipResult res;
    if (opts_.initial_solution) {
      Vector start = *opts_.initial_solution;
      for (std::size_t v : prob_.binary_vars)
        if (v < start.size()) start[v] = std::round(start[v]);
      if (max_violation(prob_, start) <= kIntegralityTol) offer_incumbent(start);
    }
    heap_.push_back(Node{next_id_++, -kInf, {}, {}});
    std::size_t processed = 0;
    MipStatus stop = MipStatus::Optimal;
    bool limit_hit = false;
    while (!heap_.empty()) {
      if (elapsed() >= opts_.limits.time_limit_s) {
        stop = MipStatus::TimedOut;
        limit_hit = true;
        break;
      }
      if (nodes_ >= opts_.limits.node_cap) {
        stop = MipStatus::Feasible;
        limit_hit = true;
        break;
      }
      if (has_incumbent_ && gap(open_bound()) <= opts_.limits.gap_target) break;

      std::pop_heap(heap_.begin(), heap_.end(), heap_after);
      Node node = std::move(heap_.back());
      heap_.pop_back();
      if (prunable(node.bound)) continue;

      const bool dive = processed % std::max<std::size_t>(1, opts_.dive_every) == 0;
      ++processed;
      while (true) {
        auto children = expand(node);
        if (!children) break;
        auto& [down, up, prefer_up] = *children;
        if (!dive) {
          push(std::move(down));
          push(std::move(up));
          break;
        }
        if (prefer_up) {
          push(std::move(down));
          node = std::move(up);
        } else {
          push(std::move(up));
          node = std::move(down);
        }
        if (nodes_ >= opts_.limits.node_cap || elapsed() >= opts_.limits.time_limit_s) {
          push(std::move(node));
          break;
        }
      }
      log_progress(false);
    }
    log_progress(true);

    res.nodes_explored = nodes_;
    res.lp_iterations = lp_iterations_;
    res.elapsed_s = elapsed();
    res.has_solution = has_incumbent_;
    if (has_incumbent_) {
      res.values = incumbent_;
      res.objective_value = incumbent_value_;
      res.best_bound = std::min(open_bound(), incumbent_value_);
      res.gap = gap(res.best_bound);
      res.status = limit_hit && res.gap > opts_.limits.gap_target ? stop : MipStatus::Optimal;
    } else {
      res.best_bound = open_bound();
      res.status = limit_hit ? stop : MipStatus::Infeasible;
    }
    return res;
  }

 private:
  struct Children {
    Node down;
    Node up;
    bool prefer_up;
  };

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  double open_bound() const {
    if (heap_.empty()) return has_incumbent_ ? incumbent_value_ : kInf;
    return heap_.front().bound;
  }

  double gap(double bound) const {
    if (!has_incumbent_) return kInf;
    return std::max(0.0, incumbent_value_ - bound) / std::max(1.0, std::abs(incumbent_value_));
  }

  bool prunable(double bound) const {
    if (!has_incumbent_) return false;
    return (incumbent_value_ - bound) / std::max(1.0, std::abs(incumbent_value_)) <=
           opts_.limits.gap_target;
  }

  void push(Node node) {
    if (prunable(node.bound)) return;
    heap_.push_back(std::move(node));
    std::push_heap(heap_.begin(), heap_.end(), heap_after);
  }

  void offer_incumbent(const Vector& values) {
    double obj = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) obj += prob_.base.objective[j] * values[j];
    if (!has_incumbent_ || obj < incumbent_value_) {
      has_incumbent_ = true;
      incumbent_ = values;
      incumbent_value_ = obj;
    }
  }

  LpSolution solve_node(const Node& node) {
    auto& eng = *engine_;
    eng.reset_bounds();
    for (const auto& [v, val] : node.fixes) eng.set_bounds(v, val, val);
    if (!node.basis.empty()) eng.load_basis(node.basis);
    try {
      return eng.solve();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Solver) throw;
      // Retry once from the all-logical basis.
      Basis cold;
      cold.status.assign(eng.num_structural() + eng.num_rows(), VarStatus::AtLower);
      for (std::size_t i = 0; i < eng.num_rows(); ++i)
        cold.status[eng.num_structural() + i] = VarStatus::Basic;
      eng.load_basis(cold);
      return eng.solve();
    }
  }

  // Solves the node relaxation; returns its two children when it must branch.
  std::optional<Children> expand(const Node& node) {
    const LpSolution lp = solve_node(node);
    ++nodes_;
    lp_iterations_ += lp.iterations;
    if (lp.status == LpStatus::Infeasible) return std::nullopt;
    if (lp.status == LpStatus::Unbounded) {
      throw solver_error("MILP: LP relaxation is unbounded");
    }
    if (prunable(lp.objective_value)) return std::nullopt;

    std::ptrdiff_t branch = -1;
    double closest = kInf;
    for (std::size_t v : prob_.binary_vars) {
      const double val = lp.values[v];
      const double frac = std::abs(val - std::round(val));
      if (frac <= kIntegralityTol) continue;
      const double dist = std::abs(val - 0.5);
      if (dist < closest || (dist == closest && static_cast<std::ptrdiff_t>(v) < branch)) {
        closest = dist;
        branch = static_cast<std::ptrdiff_t>(v);
      }
    }
    if (branch < 0) {
      Vector values = lp.values;
      for (std::size_t v : prob_.binary_vars) values[v] = std::round(values[v]);
      offer_incumbent(values);
      return std::nullopt;
    }
    const auto var = static_cast<std::size_t>(branch);
    Children ch;
    ch.prefer_up = lp.values[var] >= 0.5;
    ch.down.id = next_id_++;
    ch.down.bound = lp.objective_value;
    ch.down.fixes = node.fixes;
    ch.down.fixes.emplace_back(var, 0.0);
    ch.down.basis = lp.basis;
    ch.up.id = next_id_++;
    ch.up.bound = lp.objective_value;
    ch.up.fixes = node.fixes;
    ch.up.fixes.emplace_back(var, 1.0);
    ch.up.basis = lp.basis;
    return ch;
  }

  void log_progress(bool final_line) {
    if (opts_.log == nullptr) return;
    if (!final_line && (opts_.log_interval == 0 || nodes_ < last_log_ + opts_.log_interval))
      return;
    last_log_ = nodes_;
    const double bound = has_incumbent_ ? std::min(open_bound(), incumbent_value_) : open_bound();
    *opts_.log << "[milp] nodes " << nodes_ << " open " << heap_.size() << " incumbent "
               << (has_incumbent_ ? format_number(incumbent_value_) : std::string("none"))
               << " bound " << format_number(bound) << " gap " << format_number(gap(bound))
               << '\n';
  }

  const MixedIntegerProgram& prob_;
  MipOptions opts_;
  LinearProgram relaxed_;
  std::optional<SimplexEngine> engine_;
  std::vector<Node> heap_;
  std::size_t next_id_ = 0;
  std::size_t nodes_ = 0;
  std::size_t lp_iterations_ = 0;
  std::size_t last_log_ = 0;
  bool has_incumbent_ = false;
  Vector incumbent_;
  double incumbent_value_ = kInf;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

MipResult solve_milp(const MixedIntegerProgram& prob, const MipOptions& options) {
  prob.validate();
  return BranchAndBound(prob, options).run();
}

std::string mip_summary_json(const MipResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["status"] = to_string(r.status);
  j["has_solution"] = r.has_solution;
  j["objective"] = r.has_solution ? nlohmann::ordered_json(r.objective_value) : nullptr;
  j["best_bound"] = std::isfinite(r.best_bound) ? nlohmann::ordered_json(r.best_bound) : nullptr;
  j["gap"] = std::isfinite(r.gap) ? nlohmann::ordered_json(r.gap) : nullptr;
  j["nodes"] = r.nodes_explored;
  j["lp_iterations"] = r.lp_iterations;
  j["elapsed_s"] = r.elapsed_s;
  return j.dump();
}

}  // namespace softsensor
