#pragma once

// Program search: enumerates candidate sentences above a probability
// horizon, runs each under a fuel budget proportional to its probability,
// and doubles the epoch budget until a candidate is accepted, the language
// is exhausted, or a cutoff is reached.

#include <array>
#include <cstdint>
#include <functional>
#include <queue>

#include "glsearch/derive.hpp"
#include "glsearch/machine.hpp"

namespace glsearch {

enum class Strategy { Dfs, Best, Hybrid };

const char* strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

// Streams the sentences of prefix probability >= p_h, one per next() call.
class Enumerator {
 public:
  Enumerator(const DeriveContext& ctx, SententialForm start, double p_h, Strategy strategy,
             std::size_t memory_cap);

  std::optional<SententialForm> next();

  bool truncated() const { return truncated_; }  // the horizon cut something off
  std::size_t max_frontier() const { return max_frontier_; }

 private:
  struct Entry {
    double prob;
    std::uint64_t seq;
    SententialForm form;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.prob != b.prob) return a.prob < b.prob;
      return a.seq > b.seq;  // earlier insertion wins ties
    }
  };

  void push_children(SententialForm form, bool to_stack);
  void note_frontier();

  const DeriveContext& ctx_;
  double p_h_;
  Strategy strategy_;
  std::size_t cap_;
  std::vector<SententialForm> stack_;
  std::priority_queue<Entry, std::vector<Entry>, Worse> pq_;
  bool draining_ = false;  // hybrid hit the cap and finishes depth-first
  std::uint64_t seq_ = 0;
  bool truncated_ = false;
  std::size_t max_frontier_ = 0;
};

// Builds the test program for one candidate; the trial is accepted when the
// wrapped program evaluates to #t exactly.
struct TrialOracle {
  std::function<std::vector<Ref>(const std::vector<Ref>& candidate)> wrap;
};

struct SearchProgress {
  int epoch;
  long long t;
  long long generated;
  long long executed;
  long long skipped;
};

struct SearchConfig {
  long long t0 = 8000;
  long long tq = 1000;
  Strategy strategy = Strategy::Dfs;
  std::size_t memory_cap = std::size_t(1) << 20;
  int max_epochs = 0;        // 0: unlimited
  long long max_trials = 0;  // executed-trial cutoff; 0: unlimited
  bool skip_failures = true; // remember fuel-independent failures across epochs
  long long progress_every = 0;
  std::function<void(const SearchProgress&)> on_progress;
};

struct EpochStat {
  long long t = 0;
  double p_h = 0.0;
  long long generated = 0;
  long long executed = 0;
  long long skipped = 0;
  long long fuel_granted = 0;
  bool truncated = false;
  bool fuel_exhausted = false;  // some trial ran out of fuel this epoch
};

constexpr int kErrorKinds = 6;

struct SearchStats {
  long long generated = 0;
  long long executed = 0;
  long long skipped = 0;
  long long fuel_granted = 0;
  long long fuel_used = 0;
  std::array<long long, kErrorKinds> error_counts{};  // indexed by ErrorKind
  long long wrong_value = 0;     // ran to completion, not accepted
  long long fuel_exhausted = 0;  // ran out of fuel
  int epochs = 0;
  // semantic-error fraction over the first 1000 executed trials
  double error_rate_at_1000 = -1.0;
  std::array<long long, kErrorKinds> errors_at_1000{};
  std::size_t max_frontier = 0;
  bool exhausted = false;  // full language enumerated: no solution exists
  double wall_ms = 0.0;
  std::vector<EpochStat> epoch_stats;

  long long semantic_errors() const {
    long long n = 0;
    for (long long c : error_counts) n += c;
    return n;
  }
};

struct SearchResult {
  bool solved = false;
  std::vector<std::string> tokens;  // the accepted sentence
  std::string program_text;
  double prob = 0.0;
  long long fuel = 0;   // granted to the accepting run
  long long steps = 0;  // actually used by it
  std::vector<TraceStep> trace;
  SearchStats stats;
};

SearchResult lsearch(const DeriveContext& ctx, const SententialForm& start, const Machine& machine,
                     const TrialOracle& oracle, const SearchConfig& cfg);

}  // namespace glsearch
