#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "scfg/merge.hpp"
#include "scfg/parallel.hpp"

namespace scfg {
namespace {

std::vector<std::size_t> nearest(const std::vector<std::vector<double>>& dist, const std::vector<std::size_t>& medoids) {
  std::vector<std::size_t> out(dist.size(), 0);
  for (std::size_t p = 0; p < dist.size(); ++p) {
    for (std::size_t m = 1; m < medoids.size(); ++m) {
      if (dist[p][medoids[m]] < dist[p][medoids[out[p]]]) out[p] = m;
    }
  }
  // A medoid always stays in its own cluster, even at distance 0 from another.
  for (std::size_t m = 0; m < medoids.size(); ++m) out[medoids[m]] = m;
  return out;
}

}  // namespace

double pam_objective(const std::vector<std::vector<double>>& dist, const std::vector<std::size_t>& medoids) {
  double total = 0.0;
  for (std::size_t p = 0; p < dist.size(); ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (auto m : medoids) best = std::min(best, dist[p][m]);
    total += best;
  }
  return total;
}

PamResult pam(const std::vector<std::vector<double>>& dist, std::size_t k, const std::vector<double>& priority,
              std::uint64_t seed) {
  const std::size_t n = dist.size();
  if (k == 0 || k > n) throw MergeError("k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  if (priority.size() != n) throw MergeError("priority vector does not match the distance matrix");
  for (const auto& row : dist) {
    if (row.size() != n) throw MergeError("distance matrix is not square");
  }

  // Preference order for ties: priority desc, then a seeded shuffle.
  std::vector<std::uint64_t> jitter(n);
  std::mt19937_64 rng(seed);
  for (auto& j : jitter) j = rng();
  auto preferred = [&](std::size_t a, std::size_t b) {
    if (priority[a] != priority[b]) return priority[a] > priority[b];
    if (jitter[a] != jitter[b]) return jitter[a] < jitter[b];
    return a < b;
  };

  std::vector<std::size_t> medoids;
  std::vector<char> chosen(n, 0);
  std::size_t first = 0;
  for (std::size_t p = 1; p < n; ++p) {
    if (preferred(p, first)) first = p;
  }
  medoids.push_back(first);
  chosen[first] = 1;
  while (medoids.size() < k) {
    std::optional<std::size_t> pick;
    double far = -1.0;
    for (std::size_t p = 0; p < n; ++p) {
      if (chosen[p]) continue;
      double d = std::numeric_limits<double>::infinity();
      for (auto m : medoids) d = std::min(d, dist[p][m]);
      if (!pick || d > far || (d == far && preferred(p, *pick))) {
        pick = p;
        far = d;
      }
    }
    medoids.push_back(*pick);
    chosen[*pick] = 1;
  }

  PamResult res;
  res.objective = pam_objective(dist, medoids);
  res.trace.push_back(res.objective);
  for (;;) {
    double best = res.objective;
    std::optional<std::pair<std::size_t, std::size_t>> swap;
    for (std::size_t i = 0; i < medoids.size(); ++i) {
      for (std::size_t h = 0; h < n; ++h) {
        if (chosen[h]) continue;
        auto trial = medoids;
        trial[i] = h;
        const double obj = pam_objective(dist, trial);
        if (obj < best - 1e-12 * std::max(1.0, std::abs(best))) {
          best = obj;
          swap = {i, h};
        }
      }
    }
    if (!swap) break;
    chosen[medoids[swap->first]] = 0;
    chosen[swap->second] = 1;
    medoids[swap->first] = swap->second;
    res.objective = best;
    res.trace.push_back(best);
  }
  std::sort(medoids.begin(), medoids.end());
  res.medoids = medoids;
  res.assignment = nearest(dist, medoids);
  return res;
}

KMedoidsResult kmedoids(const Scfg& g, const KMedoidsOptions& opt) {
  const auto nv = g.num_nonterminals();
  const std::size_t plain = nv == 0 ? 0 : nv - 1;
  const std::size_t n_top = std::min(opt.n_top, plain);
  if (opt.k == 0) throw MergeError("k must be positive");
  if (opt.k > n_top) {
    throw MergeError("k=" + std::to_string(opt.k) + " exceeds the " + std::to_string(n_top) +
                     " non-terminals available for clustering");
  }

  std::vector<NtId> order(plain);
  std::iota(order.begin(), order.end(), NtId{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](NtId a, NtId b) { return g.nonterminal(a).count > g.nonterminal(b).count; });
  KMedoidsResult res;
  res.top.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_top));
  const std::vector<NtId> rest(order.begin() + static_cast<std::ptrdiff_t>(n_top), order.end());

  res.plan = MergePlan(nv);
  const ContextIndex index(g, res.plan);
  const std::size_t threads = std::max<std::size_t>(1, opt.threads);

  std::vector<std::vector<double>> dist(n_top, std::vector<double>(n_top, 0.0));
  {
    const std::size_t workers = std::min(threads, n_top);
    parallel_for(workers, workers, [&](std::size_t t) {
      EquivalenceEvaluator ev(index, opt.equivalence);
      for (std::size_t i = t; i < n_top; i += workers) {
        for (std::size_t j = i + 1; j < n_top; ++j) dist[i][j] = ev.dissimilarity(res.top[i], res.top[j]);
      }
    });
    for (std::size_t i = 0; i < n_top; ++i) {
      for (std::size_t j = 0; j < i; ++j) dist[i][j] = dist[j][i];
    }
  }
  std::vector<double> priority(n_top);
  for (std::size_t i = 0; i < n_top; ++i) priority[i] = to_double(g.nonterminal(res.top[i]).count);
  res.clustering = pam(dist, opt.k, priority, opt.seed);
  for (auto m : res.clustering.medoids) res.medoids.push_back(res.top[m]);

  for (std::size_t i = 0; i < n_top; ++i) {
    res.plan.unite(res.medoids[res.clustering.assignment[i]], res.top[i]);
  }
  std::vector<std::size_t> home(rest.size(), 0);
  {
    const std::size_t workers = std::min(threads, std::max<std::size_t>(1, rest.size()));
    parallel_for(workers, workers, [&](std::size_t t) {
      EquivalenceEvaluator ev(index, opt.equivalence);
      for (std::size_t i = t; i < rest.size(); i += workers) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < res.medoids.size(); ++m) {
          const double d = ev.dissimilarity(rest[i], res.medoids[m]);
          if (d < best) {
            best = d;
            home[i] = m;
          }
        }
      }
    });
  }
  for (std::size_t i = 0; i < rest.size(); ++i) res.plan.unite(res.medoids[home[i]], rest[i]);
  return res;
}

}  // namespace scfg
