#pragma once

#include "slowent/word.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slowent {

// Immutable lazily-expanded word with arbitrary-precision length. Nodes are shared, so a
// coding of height 10^40 costs memory proportional to its construction history.
class Rope {
public:
    enum class Kind { labels, spacer, literal, concat, repeat };

    Rope() = default;
    static Rope labels(const BigInt& first, const BigInt& len);  // first, first+1, ...
    static Rope spacer(const BigInt& len);                        // symbol 0
    static Rope literal(const Word& w);
    static Rope concat(const std::vector<Rope>& parts);
    static Rope repeat(const Rope& r, const BigInt& count);

    const BigInt& length() const;
    Kind kind() const;
    bool empty() const { return !node_ || length() == 0; }

    Symbol at(const BigInt& pos) const;
    // Appends [start, start + len) to out.
    void extract(const BigInt& start, std::uint64_t len, Word& out) const;
    Word materialize(std::uint64_t cap = 1u << 22) const;

    // Exact period check for repeat nodes: child length if this is a repeat, else length.
    BigInt top_period() const;
    std::optional<Rope> repeat_child() const;
    BigInt repeat_count() const;

    // Canonical structural text (shared nodes written once); stable across runs.
    std::string structure() const;

private:
    struct Node;
    std::shared_ptr<const Node> node_;
    explicit Rope(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

}  // namespace slowent
