#ifndef PERORBIT_WORDS_HPP
#define PERORBIT_WORDS_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perorbit/errors.hpp"

namespace perorbit {

// A finite word over alphabet {0,...,k-1}, stored one symbol per byte.
using Word = std::vector<uint8_t>;

inline std::string word_to_string(const Word& w) {
    std::string s;
    s.reserve(w.size());
    for (uint8_t c : w) s.push_back(static_cast<char>('0' + c));
    return s;
}

inline Word word_from_string(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) {
        if (c < '0' || c > '9') throw InvalidSpec("word symbol out of range: " + s);
        w.push_back(static_cast<uint8_t>(c - '0'));
    }
    return w;
}

// Lexicographic order on equal-length words (shorter first otherwise).
inline bool word_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// 0/1 transition matrix over a k-letter alphabet; entry (i,j) allows i -> j.
class Transition {
public:
    Transition() : k_(0) {}
    explicit Transition(std::size_t k, bool full = true)
        : k_(k), allow_(k * k, full ? 1 : 0) {}
    Transition(std::size_t k, const std::vector<uint8_t>& entries) : k_(k), allow_(entries) {
        if (entries.size() != k * k) throw InvalidSpec("transition matrix size mismatch");
        for (uint8_t e : entries)
            if (e > 1) throw InvalidSpec("transition entries must be 0/1");
    }

    std::size_t alphabet_size() const { return k_; }
    bool allowed(std::size_t i, std::size_t j) const { return allow_[i * k_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v) { allow_[i * k_ + j] = v ? 1 : 0; }

    // Cyclic admissibility: every consecutive pair allowed, wrapping w[n-1] -> w[0].
    bool cyclically_admissible(const Word& w) const {
        if (w.empty()) return false;
        for (std::size_t i = 0; i < w.size(); ++i) {
            std::size_t j = (i + 1 == w.size()) ? 0 : i + 1;
            if (w[i] >= k_ || w[j] >= k_) return false;
            if (!allowed(w[i], w[j])) return false;
        }
        return true;
    }

    bool admissible(const Word& w) const {
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (w[i] >= k_ || w[i + 1] >= k_) return false;
            if (!allowed(w[i], w[i + 1])) return false;
        }
        return !w.empty() && w.back() < k_;
    }

    // Strong connectivity of the directed graph restricted to non-isolated letters.
    bool irreducible() const {
        if (k_ == 0) return false;
        auto reach = [&](bool forward) {
            std::vector<char> seen(k_, 0);
            std::vector<std::size_t> stack{0};
            seen[0] = 1;
            while (!stack.empty()) {
                std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v = 0; v < k_; ++v) {
                    bool edge = forward ? allowed(u, v) : allowed(v, u);
                    if (edge && !seen[v]) {
                        seen[v] = 1;
                        stack.push_back(v);
                    }
                }
            }
            return seen;
        };
        auto fwd = reach(true);
        auto bwd = reach(false);
        for (std::size_t i = 0; i < k_; ++i)
            if (!fwd[i] || !bwd[i]) return false;
        return true;
    }

    // trace(A^n) = number of cyclically admissible words of length n,
    // computed in uint64 (throws on overflow).
    unsigned long long trace_power(std::size_t n) const {
        if (n == 0) throw InvalidSpec("trace_power needs n >= 1");
        std::vector<unsigned long long> a(allow_.begin(), allow_.end());
        auto mul = [&](const std::vector<unsigned long long>& x,
                       const std::vector<unsigned long long>& y) {
            std::vector<unsigned long long> z(k_ * k_, 0);
            for (std::size_t i = 0; i < k_; ++i)
                for (std::size_t l = 0; l < k_; ++l) {
                    unsigned long long xil = x[i * k_ + l];
                    if (!xil) continue;
                    for (std::size_t j = 0; j < k_; ++j) {
                        unsigned long long y_lj = y[l * k_ + j];
                        if (!y_lj) continue;
                        if (xil > (~0ull - z[i * k_ + j]) / y_lj)
                            throw Error("trace_power overflow");
                        z[i * k_ + j] += xil * y_lj;
                    }
                }
            return z;
        };
        std::vector<unsigned long long> result;  // identity until first multiply
        std::vector<unsigned long long> base = a;
        std::size_t e = n;
        bool have = false;
        while (e > 0) {
            if (e & 1) {
                result = have ? mul(result, base) : base;
                have = true;
            }
            e >>= 1;
            if (e) base = mul(base, base);
        }
        unsigned long long t = 0;
        for (std::size_t i = 0; i < k_; ++i) {
            if (result[i * k_ + i] > ~0ull - t) throw Error("trace_power overflow");
            t += result[i * k_ + i];
        }
        return t;
    }

private:
    std::size_t k_;
    std::vector<uint8_t> allow_;
};

// Visit every cyclically admissible word of length n in lexicographic order.
// Returns false if the visitor aborted the walk.
inline bool visit_cyclic_words(const Transition& t, std::size_t n,
                               const std::function<bool(const Word&)>& visit) {
    std::size_t k = t.alphabet_size();
    if (n == 0 || k == 0) return true;
    Word w(n, 0);
    // depth-first over positions; prune on forbidden consecutive pairs
    std::function<bool(std::size_t)> rec = [&](std::size_t pos) -> bool {
        if (pos == n) {
            if (t.allowed(w[n - 1], w[0])) return visit(w);
            return true;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (pos > 0 && !t.allowed(w[pos - 1], static_cast<std::size_t>(c))) continue;
            w[pos] = static_cast<uint8_t>(c);
            if (!rec(pos + 1)) return false;
        }
        return true;
    };
    return rec(0);
}

// All admissible words of a given length in lexicographic order.
inline std::vector<Word> admissible_words(const Transition& t, std::size_t n) {
    std::vector<Word> out;
    std::size_t k = t.alphabet_size();
    if (n == 0 || k == 0) return out;
    Word w(n, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t pos) {
        if (pos == n) {
            out.push_back(w);
            return;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (pos > 0 && !t.allowed(w[pos - 1], static_cast<std::size_t>(c))) continue;
            w[pos] = static_cast<uint8_t>(c);
            rec(pos + 1);
        }
    };
    rec(0);
    return out;
}

// Left rotation by r places (conjugacy class representative helpers).
inline Word rotate_word(const Word& w, std::size_t r) {
    Word out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[(i + r) % w.size()];
    return out;
}

// Smallest p dividing |w| with w = (prefix of length p) repeated.
inline std::size_t primitive_period(const Word& w) {
    std::size_t n = w.size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = (w[i] == w[i - p]);
        if (ok) return p;
    }
    return n;
}

}  // namespace perorbit

#endif  // PERORBIT_WORDS_HPP
