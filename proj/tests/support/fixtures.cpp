#include "fixtures.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>

namespace scfg::testing {
namespace {

AlignmentSet monotone(std::uint32_t n) {
  AlignmentSet a;
  for (std::uint32_t i = 0; i < n; ++i) a.links.push_back({i, i});
  return a;
}

mpz_class choose(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace

Bitext house_bitext() {
  Bitext b;
  b.add({"das", "neue", "Haus"}, {"the", "new", "house"}, monotone(3));
  b.add({"das", "Haus"}, {"the", "house"}, monotone(2));
  return b;
}

std::vector<std::string> house_productions() {
  std::vector<std::string> v = {
      "I ||| [X1,1] ||| [X1,1] ||| 1",
      "I ||| [X7,1] ||| [X7,1] ||| 1",
      "X1 ||| das neue Haus ||| the new house ||| 1/6",
      "X2 ||| das neue ||| the new ||| 1/3",
      "X3 ||| neue Haus ||| new house ||| 1/3",
      "X4 ||| das ||| the ||| 2",
      "X5 ||| neue ||| new ||| 1",
      "X6 ||| Haus ||| house ||| 2",
      "X7 ||| das Haus ||| the house ||| 1/3",
      "X1 ||| [X2,1] Haus ||| [X2,1] house ||| 1/6",
      "X1 ||| das [X3,1] ||| the [X3,1] ||| 1/6",
      "X1 ||| [X4,1] neue Haus ||| [X4,1] new house ||| 1/6",
      "X1 ||| das [X5,1] Haus ||| the [X5,1] house ||| 1/6",
      "X1 ||| das neue [X6,1] ||| the new [X6,1] ||| 1/6",
      "X2 ||| [X4,1] neue ||| [X4,1] new ||| 1/3",
      "X2 ||| das [X5,1] ||| the [X5,1] ||| 1/3",
      "X3 ||| [X5,1] Haus ||| [X5,1] house ||| 1/3",
      "X3 ||| neue [X6,1] ||| new [X6,1] ||| 1/3",
      "X7 ||| [X4,1] Haus ||| [X4,1] house ||| 1/3",
      "X7 ||| das [X6,1] ||| the [X6,1] ||| 1/3",
  };
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::string> render_productions(const Scfg& g) {
  std::vector<std::string> out;
  for (const auto& p : g.productions()) {
    out.push_back(g.nonterminal(p.left).name + " ||| " + g.render_side(p, true) + " ||| " + g.render_side(p, false) +
                  " ||| " + format_exact(p.count));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<SentencePair, AlignmentSet> random_pair(std::mt19937& rng, std::size_t max_len) {
  static const char* const src_vocab[] = {"a", "b", "c"};
  static const char* const tgt_vocab[] = {"x", "y", "z"};
  SentencePair sp;
  const std::size_t n = 1 + rng() % max_len;
  const std::size_t m = 1 + rng() % max_len;
  for (std::size_t i = 0; i < n; ++i) sp.source.emplace_back(src_vocab[rng() % 3]);
  for (std::size_t j = 0; j < m; ++j) sp.target.emplace_back(tgt_vocab[rng() % 3]);
  AlignmentSet a;
  const unsigned density = 1 + rng() % 4;  // link probability density/8
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < m; ++j) {
      if (rng() % 8 < density) a.links.push_back({i, j});
    }
  }
  return {sp, a};
}

Bitext synthetic_bitext(std::size_t pairs, std::uint32_t seed) {
  std::mt19937 rng(seed);
  Bitext b;
  for (std::size_t s = 0; s < pairs; ++s) {
    std::vector<std::string> src, tgt;
    AlignmentSet a;
    auto add_np = [&] {
      const auto det = std::to_string(rng() % 2);
      const bool has_adj = rng() % 2 == 0;
      const auto adj = std::to_string(rng() % 3);
      const auto noun = std::to_string(rng() % 4);
      const auto base_s = static_cast<std::uint32_t>(src.size());
      const auto base_t = static_cast<std::uint32_t>(tgt.size());
      src.push_back("d" + det);
      tgt.push_back("D" + det);
      a.links.push_back({base_s, base_t});
      if (has_adj) {
        src.push_back("a" + adj);
        src.push_back("n" + noun);
        tgt.push_back("N" + noun);
        tgt.push_back("A" + adj);
        a.links.push_back({base_s + 1, base_t + 2});
        a.links.push_back({base_s + 2, base_t + 1});
      } else {
        src.push_back("n" + noun);
        tgt.push_back("N" + noun);
        a.links.push_back({base_s + 1, base_t + 1});
      }
    };
    const auto shape = rng() % 10;
    add_np();
    if (shape >= 3) {
      const auto verb = std::to_string(rng() % 2);
      a.links.push_back({static_cast<std::uint32_t>(src.size()), static_cast<std::uint32_t>(tgt.size())});
      src.push_back("v" + verb);
      tgt.push_back("V" + verb);
    }
    if (shape >= 6) add_np();
    b.add(std::move(src), std::move(tgt), std::move(a));
  }
  return b;
}

Bitext random_bitext(std::mt19937& rng, std::size_t pairs, std::size_t max_len) {
  Bitext b;
  for (std::size_t i = 0; i < pairs; ++i) {
    auto [sp, a] = random_pair(rng, max_len);
    b.add(std::move(sp.source), std::move(sp.target), std::move(a));
  }
  return b;
}

std::set<SpanPair> brute_force_span_pairs(const SentencePair& sp, const AlignmentSet& a) {
  std::set<SpanPair> out;
  const auto n = static_cast<std::uint32_t>(sp.source.size());
  const auto m = static_cast<std::uint32_t>(sp.target.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j <= n; ++j) {
      for (std::uint32_t k = 0; k < m; ++k) {
        for (std::uint32_t l = k + 1; l <= m; ++l) {
          bool inside = false, consistent = true;
          for (const auto& link : a.links) {
            const bool s_in = i <= link.src && link.src < j;
            const bool t_in = k <= link.tgt && link.tgt < l;
            if (s_in != t_in) consistent = false;
            if (s_in && t_in) inside = true;
          }
          if (consistent && inside) out.insert(SpanPair{Span{i, j}, Span{k, l}, sp.id});
        }
      }
    }
  }
  return out;
}

bool fisher_oracle(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d, double alpha) {
  const unsigned long r1 = a + b, r2 = c + d, c1 = a + c, n = a + b + c + d;
  const mpz_class total = choose(n, c1);
  auto prob = [&](unsigned long x) -> mpq_class {
    if (x > r1 || c1 - x > r2) return 0;
    mpq_class p(choose(r1, x) * choose(r2, c1 - x), total);
    p.canonicalize();
    return p;
  };
  const mpq_class observed = prob(a);
  mpq_class p = 0;
  for (unsigned long x = 0; x <= c1; ++x) {
    if (x > r1 || c1 - x > r2) continue;
    const mpq_class px = prob(x);
    if (px <= observed) p += px;
  }
  return p < mpq_class(alpha);
}

std::set<std::pair<std::vector<TokenId>, std::vector<TokenId>>> bounded_language(const Scfg& g,
                                                                                 std::size_t max_len) {
  using Yield = std::pair<std::vector<TokenId>, std::vector<TokenId>>;
  std::vector<std::set<Yield>> lang(g.num_nonterminals());
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.productions()) {
      std::vector<const Yield*> pick(p.arity(), nullptr);
      std::vector<std::vector<const Yield*>> options(p.arity());
      bool empty = false;
      for (std::size_t k = 0; k < p.arity(); ++k) {
        for (const auto& y : lang[p.fillers[k]]) options[k].push_back(&y);
        if (options[k].empty()) empty = true;
      }
      if (empty) continue;
      std::vector<std::size_t> idx(p.arity(), 0);
      for (;;) {
        Yield out;
        for (auto s : p.source) {
          if (s.is_terminal()) {
            out.first.push_back(s.token());
          } else {
            const auto& y = options[s.slot() - 1][idx[s.slot() - 1]]->first;
            out.first.insert(out.first.end(), y.begin(), y.end());
          }
        }
        for (auto s : p.target) {
          if (s.is_terminal()) {
            out.second.push_back(s.token());
          } else {
            const auto& y = options[s.slot() - 1][idx[s.slot() - 1]]->second;
            out.second.insert(out.second.end(), y.begin(), y.end());
          }
        }
        if (out.first.size() <= max_len && out.second.size() <= max_len && lang[p.left].insert(out).second) {
          changed = true;
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }
  return g.empty() ? std::set<Yield>{} : lang[kInitial];
}

double brute_force_kmedoids(const std::vector<std::vector<double>>& dist, std::size_t k) {
  const std::size_t n = dist.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double near = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n; ++m) {
        if (mask >> m & 1u) near = std::min(near, dist[p][m]);
      }
      total += near;
    }
    best = std::min(best, total);
  }
  return best;
}

TempDir::TempDir(const std::string& tag) {
  auto base = std::filesystem::temp_directory_path();
  std::random_device rd;
  for (;;) {
    auto candidate = base / ("scfg_forge_" + tag + "_" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate.string();
      break;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace scfg::testing
