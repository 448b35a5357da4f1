#include "glsearch/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace glsearch {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Dfs: return "dfs";
    case Strategy::Best: return "best";
    case Strategy::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
  if (name == "dfs") return Strategy::Dfs;
  if (name == "best") return Strategy::Best;
  if (name == "hybrid") return Strategy::Hybrid;
  return std::nullopt;
}

Enumerator::Enumerator(const DeriveContext& ctx, SententialForm start, double p_h,
                       Strategy strategy, std::size_t memory_cap)
    : ctx_(ctx), p_h_(p_h), strategy_(strategy), cap_(memory_cap) {
  if (strategy_ == Strategy::Dfs) {
    stack_.push_back(std::move(start));
  } else {
    pq_.push(Entry{start.prob, seq_++, std::move(start)});
  }
  note_frontier();
}

void Enumerator::note_frontier() {
  std::size_t n = stack_.size() + pq_.size();
  if (n > max_frontier_) max_frontier_ = n;
}

void Enumerator::push_children(SententialForm form, bool to_stack) {
  auto children = expand_leftmost(form, ctx_, p_h_, &truncated_);
  if (to_stack) {
    // reversed, so the most probable child is expanded first
    for (auto it = children.rbegin(); it != children.rend(); ++it)
      stack_.push_back(std::move(*it));
  } else {
    for (auto& c : children) {
      double p = c.prob;
      pq_.push(Entry{p, seq_++, std::move(c)});
    }
  }
  note_frontier();
}

std::optional<SententialForm> Enumerator::next() {
  for (;;) {
    if (strategy_ == Strategy::Dfs || draining_) {
      if (!stack_.empty()) {
        SententialForm form = std::move(stack_.back());
        stack_.pop_back();
        if (is_sentence(form)) return form;
        push_children(std::move(form), /*to_stack=*/true);
        continue;
      }
      if (strategy_ == Strategy::Dfs || pq_.empty()) return std::nullopt;
      // drain the next frontier entry depth-first, in priority order
      SententialForm form = std::move(const_cast<Entry&>(pq_.top()).form);
      pq_.pop();
      if (is_sentence(form)) return form;
      push_children(std::move(form), /*to_stack=*/true);
      continue;
    }

    if (pq_.empty()) return std::nullopt;
    SententialForm form = std::move(const_cast<Entry&>(pq_.top()).form);
    pq_.pop();
    if (is_sentence(form)) return form;
    if (strategy_ == Strategy::Hybrid) {
      // a successor set that would overflow the cap flips the enumerator
      // into depth-first draining; the frontier never grows again
      auto probe = expand_leftmost(form, ctx_, p_h_, &truncated_);
      if (pq_.size() + probe.size() > cap_) {
        draining_ = true;
        for (auto it = probe.rbegin(); it != probe.rend(); ++it)
          stack_.push_back(std::move(*it));
      } else {
        for (auto& c : probe) {
          double p = c.prob;
          pq_.push(Entry{p, seq_++, std::move(c)});
        }
      }
      note_frontier();
      continue;
    }
    push_children(std::move(form), /*to_stack=*/false);
  }
}

namespace {

struct TokenHash {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  bool operator==(const TokenHash&) const = default;
};

struct TokenHashHasher {
  std::size_t operator()(const TokenHash& h) const {
    return static_cast<std::size_t>(h.a ^ (h.b * 0x9E3779B97F4A7C15ULL));
  }
};

TokenHash hash_tokens(const std::vector<std::string>& tokens) {
  // two FNV-1a streams; 128 bits make collisions negligible at 1e7 trials
  std::uint64_t a = 0xcbf29ce484222325ULL;
  std::uint64_t b = 0x9ae16a3b2f90404fULL;
  for (const auto& t : tokens) {
    for (unsigned char c : t) {
      a = (a ^ c) * 0x100000001b3ULL;
      b = (b ^ (c + 0x7f)) * 0x100000001b3ULL;
    }
    a = (a ^ 0x1fu) * 0x100000001b3ULL;  // token separator
    b = (b ^ 0x2eu) * 0x100000001b3ULL;
  }
  return {a, b};
}

constexpr std::size_t kSkipCacheCap = std::size_t(2) << 20;

bool accepted(const EvalOutcome& out) {
  return out.ok() && is_boolean(out.value) && std::get<bool>(out.value->v);
}

}  // namespace

SearchResult lsearch(const DeriveContext& ctx, const SententialForm& start, const Machine& machine,
                     const TrialOracle& oracle, const SearchConfig& cfg) {
  auto t_begin = std::chrono::steady_clock::now();
  SearchResult result;
  SearchStats& stats = result.stats;
  std::unordered_set<TokenHash, TokenHashHasher> failed;

  auto finish = [&](bool exhausted) -> SearchResult& {
    stats.exhausted = exhausted;
    stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t_begin)
                        .count();
    return result;
  };
  auto snapshot_if_due = [&] {
    if (stats.executed == 1000 && stats.error_rate_at_1000 < 0.0) {
      stats.errors_at_1000 = stats.error_counts;
      stats.error_rate_at_1000 =
          static_cast<double>(stats.semantic_errors()) / static_cast<double>(stats.executed);
    }
  };

  for (long long t = cfg.t0;; t *= 2) {
    ++stats.epochs;
    EpochStat epoch;
    epoch.t = t;
    epoch.p_h = static_cast<double>(cfg.tq) / static_cast<double>(t);
    Enumerator en(ctx, start, epoch.p_h, cfg.strategy, cfg.memory_cap);

    while (auto form = en.next()) {
      ++stats.generated;
      ++epoch.generated;
      auto tokens = sentence_tokens(*form);
      if (cfg.skip_failures && failed.count(hash_tokens(tokens))) {
        ++stats.skipped;
        ++epoch.skipped;
        continue;
      }
      long long fuel = static_cast<long long>(form->prob * static_cast<double>(t));
      if (fuel < 1) fuel = 1;  // the horizon guarantees prob*t >= tq anyway

      auto program = tokens_to_program(tokens);
      auto test = oracle.wrap(program);
      EvalOutcome out = machine.evaluate(test, fuel);

      ++stats.executed;
      ++epoch.executed;
      stats.fuel_granted += fuel;
      epoch.fuel_granted += fuel;
      stats.fuel_used += out.steps_used;

      if (accepted(out)) {
        result.solved = true;
        result.tokens = std::move(tokens);
        result.program_text = join_tokens(result.tokens);
        result.prob = form->prob;
        result.fuel = fuel;
        result.steps = out.steps_used;
        result.trace = trace_steps(*form);
        snapshot_if_due();
        stats.max_frontier = std::max(stats.max_frontier, en.max_frontier());
        epoch.truncated = en.truncated();
        stats.epoch_stats.push_back(epoch);
        return finish(false);
      }

      switch (out.status) {
        case EvalOutcome::Status::FuelExhausted:
          ++stats.fuel_exhausted;
          epoch.fuel_exhausted = true;
          break;
        case EvalOutcome::Status::RuntimeError:
          ++stats.error_counts[static_cast<std::size_t>(out.error_kind)];
          if (cfg.skip_failures && failed.size() < kSkipCacheCap)
            failed.insert(hash_tokens(tokens));
          break;
        case EvalOutcome::Status::Value:
          ++stats.wrong_value;
          if (cfg.skip_failures && failed.size() < kSkipCacheCap)
            failed.insert(hash_tokens(tokens));
          break;
      }
      snapshot_if_due();

      if (cfg.progress_every > 0 && cfg.on_progress && stats.executed % cfg.progress_every == 0) {
        cfg.on_progress(
            SearchProgress{stats.epochs, t, stats.generated, stats.executed, stats.skipped});
      }
      if (cfg.max_trials > 0 && stats.executed >= cfg.max_trials) {
        stats.max_frontier = std::max(stats.max_frontier, en.max_frontier());
        epoch.truncated = en.truncated();
        stats.epoch_stats.push_back(epoch);
        return finish(false);
      }
    }

    epoch.truncated = en.truncated();
    stats.max_frontier = std::max(stats.max_frontier, en.max_frontier());
    stats.epoch_stats.push_back(epoch);

    // nothing was cut off by the horizon and no trial starved: a larger t
    // cannot change any outcome, so the language holds no solution
    if (!epoch.truncated && !epoch.fuel_exhausted) return finish(true);
    if (cfg.max_epochs > 0 && stats.epochs >= cfg.max_epochs) return finish(false);
    if (t > (std::numeric_limits<long long>::max() / 2)) return finish(false);
  }
}

}  // namespace glsearch
