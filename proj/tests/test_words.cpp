#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "perorbit/words.hpp"

using namespace perorbit;

namespace {

// dense n-step path count for small alphabets, as an independent check on
// Transition::trace_power
unsigned long long brute_trace_power(const Transition& t, std::size_t n) {
    std::size_t k = t.alphabet_size();
    std::vector<std::vector<unsigned long long>> m(k, std::vector<unsigned long long>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m[i][j] = t.allowed(i, j) ? 1 : 0;
    auto cur = m;
    for (std::size_t s = 1; s < n; ++s) {
        std::vector<std::vector<unsigned long long>> nxt(k,
                                                         std::vector<unsigned long long>(k, 0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t l = 0; l < k; ++l)
                for (std::size_t j = 0; j < k; ++j) nxt[i][j] += cur[i][l] * m[l][j];
        cur = nxt;
    }
    unsigned long long tr = 0;
    for (std::size_t i = 0; i < k; ++i) tr += cur[i][i];
    return tr;
}

Transition golden_mean() {
    return Transition(2, std::vector<uint8_t>{1, 1, 1, 0});  // forbid 11
}

}  // namespace

TEST_CASE("word string round trip and ordering") {
    Word w = word_from_string("0110");
    REQUIRE(w == Word{0, 1, 1, 0});
    REQUIRE(word_to_string(w) == "0110");
    REQUIRE(word_less(word_from_string("001"), word_from_string("010")));
    REQUIRE(word_less(word_from_string("11"), word_from_string("000")));  // shorter first
}

TEST_CASE("cyclic word visitor enumerates exactly the cyclically admissible words") {
    Transition full(2, true);
    Transition gm = golden_mean();
    for (std::size_t n = 1; n <= 10; ++n) {
        std::size_t count_full = 0;
        visit_cyclic_words(full, n, [&](const Word&) {
            ++count_full;
            return true;
        });
        REQUIRE(count_full == (std::size_t(1) << n));

        std::vector<Word> seen;
        visit_cyclic_words(gm, n, [&](const Word& w) {
            REQUIRE(gm.cyclically_admissible(w));
            seen.push_back(w);
            return true;
        });
        REQUIRE(seen.size() == gm.trace_power(n));
        REQUIRE(std::is_sorted(seen.begin(), seen.end()));  // lexicographic order
        // no duplicates
        REQUIRE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    }
}

TEST_CASE("trace_power matches dense matrix powers") {
    std::mt19937 rng(20240901);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t k = 2 + rng() % 3;
        std::vector<uint8_t> entries(k * k);
        for (auto& e : entries) e = static_cast<uint8_t>(rng() % 2);
        // keep at least one allowed transition per row so counts are nontrivial
        for (std::size_t i = 0; i < k; ++i) entries[i * k + rng() % k] = 1;
        Transition t(k, entries);
        for (std::size_t n = 1; n <= 8; ++n)
            REQUIRE(t.trace_power(n) == brute_trace_power(t, n));
    }
}

TEST_CASE("golden mean trace counts follow the Lucas recurrence") {
    Transition gm = golden_mean();
    // trace A^n = L_n with L_1 = 1, L_2 = 3, L_{n+1} = L_n + L_{n-1}
    std::vector<unsigned long long> lucas{0, 1, 3};
    for (std::size_t n = 3; n <= 20; ++n) lucas.push_back(lucas[n - 1] + lucas[n - 2]);
    for (std::size_t n = 1; n <= 20; ++n) REQUIRE(gm.trace_power(n) == lucas[n]);
}

TEST_CASE("admissible_words lists sorted admissible words") {
    Transition gm = golden_mean();
    auto w3 = admissible_words(gm, 3);
    REQUIRE(w3.size() == 5);  // 000 001 010 100 101
    REQUIRE(std::is_sorted(w3.begin(), w3.end()));
    for (const auto& w : w3) REQUIRE(gm.admissible(w));
    // non-cyclic admissibility: 100 is admissible even though 0->...->1 wraps
    REQUIRE(std::find(w3.begin(), w3.end(), Word{1, 0, 0}) != w3.end());
}

TEST_CASE("rotation and primitive period properties") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng() % 12;
        Word w(n);
        for (auto& c : w) c = static_cast<uint8_t>(rng() % 2);
        std::size_t p = primitive_period(w);
        REQUIRE(p >= 1);
        REQUIRE(n % p == 0);
        REQUIRE(rotate_word(w, p) == w);
        REQUIRE(rotate_word(w, n) == w);
        // no smaller rotation fixes the word
        for (std::size_t r = 1; r < p; ++r) REQUIRE(rotate_word(w, r) != w);
        // rotating twice composes
        std::size_t a = rng() % n, b = rng() % n;
        REQUIRE(rotate_word(rotate_word(w, a), b) == rotate_word(w, (a + b) % n));
    }
}

TEST_CASE("irreducibility detection") {
    REQUIRE(Transition(2, true).irreducible());
    REQUIRE(golden_mean().irreducible());
    // 1 cannot reach 0
    Transition dead(2, std::vector<uint8_t>{1, 1, 0, 1});
    REQUIRE_FALSE(dead.irreducible());
}
