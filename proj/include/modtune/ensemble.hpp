#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "modtune/detector.hpp"
#include "modtune/graph.hpp"
#include "modtune/rng.hpp"

namespace modtune {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ErSample {
  Graph graph;
  std::int64_t rejections = 0;  // disconnected samples discarded before this one
};

inline constexpr std::int64_t kMaxErRejections = 1'000'000;

namespace detail {

// Draws G(n, p) by geometric skipping over the upper triangle in row-major
// order. Node v's degree is final once row v is done, so with
// stop_on_isolated the draw is abandoned at the first isolated node.
// Returns false only in that case.
inline bool draw_er(int n, double p, Rng& rng, bool stop_on_isolated,
                    std::vector<std::pair<int, int>>& edges, std::vector<int>& degree) {
  edges.clear();
  degree.assign(n, 0);
  if (p >= 1.0) {
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) edges.emplace_back(v, w);
    std::fill(degree.begin(), degree.end(), n - 1);
    return true;
  }
  const double log_q = std::log1p(-p);
  std::int64_t v = 0, w = 0;
  for (;;) {
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-rng.uniform()) / log_q));
    while (w >= n) {
      if (stop_on_isolated && degree[v] == 0) return false;
      ++v;
      if (v >= n - 1) return !(stop_on_isolated && degree[n - 1] == 0);
      w = w - n + v + 1;
    }
    edges.emplace_back(static_cast<int>(v), static_cast<int>(w));
    ++degree[v];
    ++degree[w];
  }
}

}  // namespace detail

/// Edge list of one G(n, p) sample with p = k_avg / (n - 1).
inline std::vector<std::pair<int, int>> gen_er_edges(int n, double k_avg, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree;
  detail::draw_er(n, k_avg / (n - 1), rng, false, edges, degree);
  return edges;
}

namespace detail {

// Union-find connectivity test on a raw edge list.
inline bool spans_connected(int n, const std::vector<std::pair<int, int>>& edges,
                            std::vector<int>& scratch) {
  scratch.resize(n);
  for (int i = 0; i < n; ++i) scratch[i] = i;
  auto find = [&](int x) {
    while (scratch[x] != x) x = scratch[x] = scratch[scratch[x]];
    return x;
  };
  int components = n;
  for (auto [u, v] : edges) {
    const int a = find(u), b = find(v);
    if (a != b) {
      scratch[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace detail

inline Graph er_graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return Graph::from_edges(n, edges, std::move(labels));
}

/// Erdos-Renyi graph conditioned on being connected: samples are redrawn
/// from one random stream until one has a single component. Gives up after
/// `max_rejections` disconnected samples.
inline ErSample gen_er_connected(int n, double k_avg, std::uint64_t seed,
                                 std::int64_t max_rejections = kMaxErRejections) {
  if (n < 2) throw std::invalid_argument("need at least 2 nodes");
  if (!(k_avg > 0) || k_avg > n - 1) throw std::invalid_argument("average degree must lie in (0, n-1]");
  const double p = k_avg / (n - 1);
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree, scratch;
  Rng rng(seed);
  for (std::int64_t attempt = 0; attempt <= max_rejections; ++attempt) {
    if (detail::draw_er(n, p, rng, true, edges, degree) && detail::spans_connected(n, edges, scratch))
      return {er_graph_from_edges(n, edges), attempt};
  }
  throw GenerationError("no connected sample within " + std::to_string(max_rejections) +
                        " rejections (n=" + std::to_string(n) + ", k=" + std::to_string(k_avg) + ")");
}

struct EnsembleStats {
  std::map<int, std::int64_t> size_histogram;  // community size -> count
  std::vector<double> q_samples;               // per network, in generation order
  double mean_q = 0.0;
  double stddev_q = 0.0;  // sample standard deviation (n - 1)
  bool stddev_defined = false;
  std::int64_t sample_count = 0;
  std::int64_t rejected_disconnected = 0;
  std::int64_t nonconverged = 0;

  std::int64_t community_total() const {
    std::int64_t t = 0;
    for (auto& [size, count] : size_histogram) t += count;
    return t;
  }

  void finalize() {
    sample_count = static_cast<std::int64_t>(q_samples.size());
    double sum = 0.0;
    for (double q : q_samples) sum += q;
    mean_q = sample_count ? sum / static_cast<double>(sample_count) : 0.0;
    stddev_defined = sample_count > 1;
    stddev_q = 0.0;
    if (stddev_defined) {
      double ss = 0.0;
      for (double q : q_samples) ss += (q - mean_q) * (q - mean_q);
      stddev_q = std::sqrt(ss / static_cast<double>(sample_count - 1));
    }
  }
};

/// Detects communities once in each of `count` connected ER networks, under
/// every config in `cfgs`. Network i is generated and detected with seed
/// `seed ^ i`, so the output does not depend on the thread count and all
/// configs see the same networks. The thread count is taken from cfgs[0].
inline std::vector<EnsembleStats> run_ensembles(int count, int n, double k_avg,
                                                std::span<const DetectConfig> cfgs,
                                                std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("count must be at least 1");
  if (cfgs.empty()) throw std::invalid_argument("no detector configuration given");
  for (auto& c : cfgs) c.validate();
  const std::size_t nc = cfgs.size();
  struct One {
    double q = 0;
    std::vector<int> sizes;
    int nonconverged = 0;
  };
  std::vector<One> out(static_cast<std::size_t>(count) * nc);
  std::vector<std::int64_t> rejections(count, 0);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](int i) {
    try {
      const std::uint64_t s = seed ^ static_cast<std::uint64_t>(i);
      ErSample sample = gen_er_connected(n, k_avg, s);
      rejections[i] = sample.rejections;
      for (std::size_t j = 0; j < nc; ++j) {
        DetectConfig c = cfgs[j];
        c.seed = s;
        c.restarts = 1;
        c.threads = 1;
        DetectResult r = detect(sample.graph, c);
        One& o = out[static_cast<std::size_t>(i) * nc + j];
        o.q = r.modularity;
        o.sizes.assign(r.partition.sizes().begin(), r.partition.sizes().end());
        o.nonconverged = r.nonconverged;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int workers = std::min(cfgs[0].threads, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < count; i += workers) work(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<EnsembleStats> stats(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    EnsembleStats& st = stats[j];
    st.q_samples.reserve(count);
    for (int i = 0; i < count; ++i) {
      const One& o = out[static_cast<std::size_t>(i) * nc + j];
      st.q_samples.push_back(o.q);
      for (int sz : o.sizes) ++st.size_histogram[sz];
      st.rejected_disconnected += rejections[i];
      st.nonconverged += o.nonconverged;
    }
    st.finalize();
  }
  return stats;
}

inline EnsembleStats run_ensemble(int count, int n, double k_avg, const DetectConfig& cfg,
                                  std::uint64_t seed) {
  return run_ensembles(count, n, k_avg, std::span<const DetectConfig>(&cfg, 1), seed).front();
}

/// Dense histogram over sizes 0..max smoothed by a centred moving average of
/// `width`; sizes outside the histogram count as zero.
inline std::vector<double> smoothed_histogram(const std::map<int, std::int64_t>& hist, int width) {
  if (hist.empty()) return {};
  if (width < 1) throw std::invalid_argument("smoothing width must be positive");
  const int top = hist.rbegin()->first;
  std::vector<double> dense(top + 1, 0.0);
  for (auto [s, c] : hist) dense[s] = static_cast<double>(c);
  const int half = width / 2;
  std::vector<double> out(dense.size(), 0.0);
  for (int i = 0; i <= top; ++i) {
    double sum = 0.0;
    for (int j = std::max(0, i - half); j <= std::min(top, i + half); ++j) sum += dense[j];
    out[i] = sum / width;
  }
  return out;
}

/// Size with the largest count (smallest such size on ties).
inline int histogram_mode(const std::map<int, std::int64_t>& hist) {
  int mode = 0;
  std::int64_t best = -1;
  for (auto [s, c] : hist)
    if (c > best) {
      best = c;
      mode = s;
    }
  return mode;
}

struct PeakSummary {
  int mode = 0;              // position of the global maximum
  double mode_value = 0.0;
  int secondary = -1;        // position of the highest other local maximum, -1 if none
  double secondary_value = 0.0;
  double ratio() const { return mode_value > 0 ? secondary_value / mode_value : 0.0; }
};

/// Local maxima of a series, treating plateaus as one peak (reported at the
/// plateau's first position). Ends count as peaks when the series falls away
/// from them.
inline PeakSummary find_peaks(const std::vector<double>& v) {
  PeakSummary ps;
  std::vector<std::pair<int, double>> peaks;
  const int n = static_cast<int>(v.size());
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    const bool left = i == 0 || v[i - 1] < v[i];
    const bool right = j == n - 1 || v[j + 1] < v[i];
    if (left && right && v[i] > 0) peaks.emplace_back(i, v[i]);
    i = j + 1;
  }
  for (auto [pos, val] : peaks)
    if (val > ps.mode_value) {
      ps.mode_value = val;
      ps.mode = pos;
    }
  for (auto [pos, val] : peaks)
    if (pos != ps.mode && val > ps.secondary_value) {
      ps.secondary_value = val;
      ps.secondary = pos;
    }
  return ps;
}

}  // namespace modtune
