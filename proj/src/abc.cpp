#include "slowent/abc.hpp"
#include "slowent/parallel.hpp"

#include <map>
#include <set>

namespace slowent {

Word circular_operator(const std::vector<Word>& words, std::uint64_t q, std::uint64_t p, std::uint64_t l,
                       Symbol b, Symbol e) {
    if (words.empty()) throw Error("circular_operator: no words");
    if (q == 0 || l == 0) throw Error("circular_operator: q and l must be positive");
    for (const auto& w : words)
        if (w.size() != q) throw Error("circular_operator: every word must have length q");
    const std::uint64_t pinv = mod_inverse(BigInt(p), BigInt(q)).convert_to<std::uint64_t>();
    const std::uint64_t k = words.size();
    Word out;
    out.reserve(k * l * q * q);
    for (std::uint64_t i = 0; i < q; ++i) {
        const std::uint64_t ji = static_cast<std::uint64_t>((static_cast<unsigned __int128>(pinv) * i) % q);
        for (const auto& w : words) {
            out.insert(out.end(), q - ji, b);
            for (std::uint64_t rep = 0; rep + 1 < l; ++rep) out.insert(out.end(), w.begin(), w.end());
            out.insert(out.end(), ji, e);
        }
    }
    return out;
}

StageNames stage_zero_names(std::uint32_t s0, std::uint64_t q) {
    if (s0 == 0 || q == 0) throw Error("stage-0 names need s_0 >= 1 and q >= 1");
    StageNames n;
    n.stage = 0;
    n.alphabet = s0;
    n.b = s0;
    n.e = s0 + 1;
    for (std::uint32_t s = 0; s < s0; ++s) n.names.push_back(Word(q, s));
    return n;
}

StageNames stage_names_untwisted(const StageNames& prev, const std::vector<Word>& collection,
                                 std::uint64_t s_n, std::uint64_t q, std::uint64_t p, std::uint64_t l) {
    const std::size_t sp = prev.names.size();
    if (sp == 0) throw Error("previous stage has no names");
    for (const auto& u : prev.names)
        if (u.size() != q) throw Error("previous names must have length q_n");
    if (collection.size() < s_n)
        throw Error("collection has " + std::to_string(collection.size()) + " words, need s_n = " + std::to_string(s_n));
    const std::size_t k = collection.empty() ? 0 : collection[0].size();
    if (k == 0 || k % sp != 0) throw Error("R2: word length k_n must be a positive multiple of s_{n-1}");
    std::vector<Word> tuples(collection.begin(), collection.begin() + static_cast<std::ptrdiff_t>(s_n));
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const Word& t = tuples[i];
        if (t.size() != k) throw Error("collection words must have equal length");
        std::vector<std::size_t> cnt(sp, 0);
        for (Symbol x : t) {
            if (x >= sp) throw Error("collection symbol outside {0, ..., s_{n-1} - 1}");
            ++cnt[x];
        }
        for (std::size_t c : cnt)
            if (c * sp != k)
                throw Error("R2 violated: tuple " + std::to_string(i) + " is not exactly uniform");
    }
    if (std::set<Word>(tuples.begin(), tuples.end()).size() != tuples.size())
        throw Error("R3 violated: tuples are not pairwise distinct");
    StageNames out;
    out.stage = prev.stage + 1;
    out.alphabet = prev.alphabet;
    out.b = prev.b;
    out.e = prev.e;
    out.tuples = tuples;
    for (const auto& t : tuples) {
        std::vector<Word> ws;
        ws.reserve(k);
        for (Symbol x : t) ws.push_back(prev.names[x]);
        out.names.push_back(circular_operator(ws, q, p, l, prev.b, prev.e));
    }
    return out;
}

BigInt TwistedAssignment::rectangle_first(std::uint64_t i, std::uint64_t j, const BigInt& prev_rlq) const {
    if (j >= k) throw Error("twisted assignment index out of range");
    return BigInt(i) + BigInt(psi[j]) * prev_rlq;
}

std::pair<std::uint64_t, std::uint64_t> TwistedAssignment::rectangle_rest(std::uint64_t j, std::uint64_t s_n) {
    if (s_n == 0) throw Error("s_n must be positive");
    return {j / s_n, j % s_n};
}

TwistedAssignment twisted_assignment(const std::vector<Word>& collection, std::uint64_t r, std::uint64_t k) {
    if (r == 0 || k != r * collection.size())
        throw Error("twisted assignment needs k = r * |Theta| (k = " + std::to_string(k) + ", r = " +
                    std::to_string(r) + ", |Theta| = " + std::to_string(collection.size()) + ")");
    TwistedAssignment a;
    a.r = r;
    a.k = k;
    for (const auto& w : collection) {
        if (w.size() != r) throw Error("collection words must have length r");
        a.psi.insert(a.psi.end(), w.begin(), w.end());
    }
    return a;
}

std::optional<std::uint64_t> SeparationStats::names_needed(const Rational& radius) const {
    if (!certified_radius || radius > *certified_radius) return std::nullopt;
    return distinct_names;
}

SeparationStats separation_stats(const std::vector<Word>& names, const std::vector<std::size_t>& shift_grid,
                                 std::size_t min_overlap, unsigned threads) {
    const std::size_t m = names.size();
    if (m < 2) throw Error("separation_stats needs at least two names");
    const std::size_t L = names[0].size();
    for (const auto& w : names)
        if (w.size() != L) throw Error("names must have equal length");

    struct Part {
        bool have = false;
        std::uint64_t mism = 0, len = 1;
        std::size_t i = 0, j = 0, t = 0;
        std::map<std::uint64_t, std::uint64_t> sum;  // overlap length -> total mismatches
        std::uint64_t count = 0;
        bool have0 = false;
        std::uint64_t mism0 = 0;
    };
    const unsigned T = std::max(1u, threads);
    std::vector<Part> parts(T);
    run_chunks(m, T, [&](unsigned id, std::size_t b, std::size_t e) {
        Part P;
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t t : shift_grid) {
                    if (i == j && t == 0) continue;
                    if (t >= L || L - t < std::max<std::size_t>(min_overlap, 1)) continue;
                    const std::uint64_t len = L - t;
                    const std::uint64_t mism = count_mismatches(names[i], t, names[j], 0, len);
                    P.sum[len] += mism;
                    ++P.count;
                    if (!P.have || mism * P.len < P.mism * len) {
                        P.have = true;
                        P.mism = mism;
                        P.len = len;
                        P.i = i;
                        P.j = j;
                        P.t = t;
                    }
                    if (t == 0 && (!P.have0 || mism < P.mism0)) {
                        P.have0 = true;
                        P.mism0 = mism;
                    }
                }
        parts[id] = P;
    });
    SeparationStats st;
    Part g;
    std::map<std::uint64_t, std::uint64_t> sum;
    for (const auto& P : parts) {
        for (const auto& [len, v] : P.sum) sum[len] += v;
        g.count += P.count;
        if (P.have && (!g.have || P.mism * g.len < g.mism * P.len)) {
            g.have = true;
            g.mism = P.mism;
            g.len = P.len;
            g.i = P.i;
            g.j = P.j;
            g.t = P.t;
        }
        if (P.have0 && (!g.have0 || P.mism0 < g.mism0)) {
            g.have0 = true;
            g.mism0 = P.mism0;
        }
    }
    st.pairs_checked = g.count;
    if (g.have) {
        st.min_distance = Rational(BigInt(g.mism), BigInt(g.len));
        st.i = g.i;
        st.j = g.j;
        st.t = g.t;
    }
    long double total = 0;
    for (const auto& [len, v] : sum) total += static_cast<long double>(v) / len;
    st.mean_distance = g.count ? static_cast<double>(total / g.count) : 0.0;
    st.distinct_names = std::set<Word>(names.begin(), names.end()).size();
    if (g.have0) {
        st.min_t0 = Rational(BigInt(g.mism0), BigInt(L));
        // Two names inside one strict ball of radius r would be closer than 2r <= min_t0.
        if (*st.min_t0 > 0) st.certified_radius = *st.min_t0 / 2;
    }
    return st;
}

}  // namespace slowent
