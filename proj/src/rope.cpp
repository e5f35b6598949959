#include "slowent/rope.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace slowent {

struct Rope::Node {
    Kind kind;
    BigInt len;
    BigInt first;                                // labels
    Word word;                                   // literal
    std::vector<std::shared_ptr<const Node>> kids;  // concat, or single child of repeat
    std::vector<BigInt> ends;                    // concat: cumulative end offsets
    BigInt count;                                // repeat
};

namespace {
const BigInt kZero = 0;

Symbol label_symbol(const BigInt& v) {
    if (v > std::numeric_limits<Symbol>::max())
        throw Error("coding label " + v.str() + " does not fit a 32-bit symbol");
    return v.convert_to<Symbol>();
}
}  // namespace

Rope Rope::labels(const BigInt& first, const BigInt& len) {
    if (len < 0 || first < 0) throw Error("rope labels need nonnegative first and length");
    auto n = std::make_shared<Node>();
    n->kind = Kind::labels;
    n->first = first;
    n->len = len;
    return Rope(n);
}

Rope Rope::spacer(const BigInt& len) {
    if (len < 0) throw Error("rope spacer length must be nonnegative");
    auto n = std::make_shared<Node>();
    n->kind = Kind::spacer;
    n->len = len;
    return Rope(n);
}

Rope Rope::literal(const Word& w) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::literal;
    n->word = w;
    n->len = w.size();
    return Rope(n);
}

Rope Rope::concat(const std::vector<Rope>& parts) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::concat;
    BigInt acc = 0;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        acc += p.length();
        n->kids.push_back(p.node_);
        n->ends.push_back(acc);
    }
    n->len = acc;
    return Rope(n);
}

Rope Rope::repeat(const Rope& r, const BigInt& count) {
    if (count < 0) throw Error("rope repeat count must be nonnegative");
    auto n = std::make_shared<Node>();
    n->kind = Kind::repeat;
    n->count = count;
    if (!r.empty() && count > 0) n->kids.push_back(r.node_);
    n->len = n->kids.empty() ? BigInt(0) : r.length() * count;
    return Rope(n);
}

const BigInt& Rope::length() const { return node_ ? node_->len : kZero; }

Rope::Kind Rope::kind() const {
    if (!node_) return Kind::concat;
    return node_->kind;
}

Symbol Rope::at(const BigInt& pos) const {
    if (pos < 0 || pos >= length()) throw Error("rope index out of range");
    const Node* n = node_.get();
    BigInt p = pos;
    for (;;) {
        switch (n->kind) {
            case Kind::labels: return label_symbol(n->first + p);
            case Kind::spacer: return 0;
            case Kind::literal: return n->word[p.convert_to<std::size_t>()];
            case Kind::concat: {
                auto it = std::upper_bound(n->ends.begin(), n->ends.end(), p);
                std::size_t i = static_cast<std::size_t>(it - n->ends.begin());
                if (i > 0) p -= n->ends[i - 1];
                n = n->kids[i].get();
                break;
            }
            case Kind::repeat:
                p %= n->kids[0]->len;
                n = n->kids[0].get();
                break;
        }
    }
}

void Rope::extract(const BigInt& start, std::uint64_t len, Word& out) const {
    if (start < 0 || start + len > length()) throw Error("rope extract out of range");
    // Iterative descent with an explicit stack of (node, offset, remaining).
    struct Frame {
        const Node* n;
        BigInt off;
        std::uint64_t len;
    };
    std::vector<Frame> stack{{node_.get(), start, len}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (f.len == 0) continue;
        const Node* n = f.n;
        switch (n->kind) {
            case Kind::labels:
                for (std::uint64_t i = 0; i < f.len; ++i) out.push_back(label_symbol(n->first + f.off + i));
                break;
            case Kind::spacer:
                out.insert(out.end(), f.len, 0);
                break;
            case Kind::literal: {
                auto b = n->word.begin() + f.off.convert_to<std::ptrdiff_t>();
                out.insert(out.end(), b, b + static_cast<std::ptrdiff_t>(f.len));
                break;
            }
            case Kind::concat: {
                auto it = std::upper_bound(n->ends.begin(), n->ends.end(), f.off);
                std::size_t i = static_cast<std::size_t>(it - n->ends.begin());
                std::vector<Frame> parts;
                BigInt off = f.off - (i > 0 ? n->ends[i - 1] : BigInt(0));
                std::uint64_t left = f.len;
                for (; left > 0 && i < n->kids.size(); ++i) {
                    BigInt avail = n->kids[i]->len - off;
                    std::uint64_t take = avail < left ? avail.convert_to<std::uint64_t>() : left;
                    parts.push_back({n->kids[i].get(), off, take});
                    left -= take;
                    off = 0;
                }
                for (auto r = parts.rbegin(); r != parts.rend(); ++r) stack.push_back(std::move(*r));
                break;
            }
            case Kind::repeat: {
                const Node* c = n->kids[0].get();
                BigInt off = f.off % c->len;
                std::uint64_t left = f.len;
                std::vector<Frame> parts;
                while (left > 0) {
                    BigInt avail = c->len - off;
                    std::uint64_t take = avail < left ? avail.convert_to<std::uint64_t>() : left;
                    parts.push_back({c, off, take});
                    left -= take;
                    off = 0;
                }
                for (auto r = parts.rbegin(); r != parts.rend(); ++r) stack.push_back(std::move(*r));
                break;
            }
        }
    }
}

Word Rope::materialize(std::uint64_t cap) const {
    if (length() > cap)
        throw Error("rope of length " + length().str() + " exceeds the materialisation cap " + std::to_string(cap));
    Word w;
    w.reserve(length().convert_to<std::size_t>());
    extract(0, length().convert_to<std::uint64_t>(), w);
    return w;
}

BigInt Rope::top_period() const {
    if (node_ && node_->kind == Kind::repeat && !node_->kids.empty()) return node_->kids[0]->len;
    return length();
}

std::optional<Rope> Rope::repeat_child() const {
    if (!node_ || node_->kind != Kind::repeat || node_->kids.empty()) return std::nullopt;
    return Rope(node_->kids[0]);
}

BigInt Rope::repeat_count() const {
    if (!node_ || node_->kind != Kind::repeat) return 1;
    return node_->count;
}

std::string Rope::structure() const {
    std::ostringstream os;
    std::unordered_map<const Node*, std::size_t> ids;
    // Post-order without recursion.
    std::vector<std::pair<const Node*, bool>> st;
    if (node_) st.push_back({node_.get(), false});
    while (!st.empty()) {
        auto [n, done] = st.back();
        st.pop_back();
        if (ids.count(n)) continue;
        if (!done) {
            st.push_back({n, true});
            for (auto it = n->kids.rbegin(); it != n->kids.rend(); ++it)
                if (!ids.count(it->get())) st.push_back({it->get(), false});
            continue;
        }
        std::size_t id = ids.size();
        ids[n] = id;
        os << id << ' ';
        switch (n->kind) {
            case Kind::labels: os << "L " << n->first << ' ' << n->len; break;
            case Kind::spacer: os << "S " << n->len; break;
            case Kind::literal:
                os << "W";
                for (Symbol x : n->word) os << ' ' << x;
                break;
            case Kind::concat:
                os << "C";
                for (const auto& k : n->kids) os << ' ' << ids.at(k.get());
                break;
            case Kind::repeat:
                os << "R " << n->count;
                for (const auto& k : n->kids) os << ' ' << ids.at(k.get());
                break;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace slowent
