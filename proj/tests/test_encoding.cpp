#include <doctest.h>

#include <algorithm>
#include <map>

#include "qtsp/encoding.hpp"

using namespace qtsp;

TEST_SUITE_BEGIN("encoding");

TEST_CASE("register shape follows the city count") {
    ReducedEncoding e4 = ReducedEncoding::for_cities(4);
    CHECK(e4.M == 3);
    CHECK(e4.k == 2);
    CHECK(e4.data_qubits() == 6);

    ReducedEncoding e5 = ReducedEncoding::for_cities(5);
    CHECK(e5.M == 4);
    CHECK(e5.k == 2);
    CHECK(e5.data_qubits() == 8);

    // 6 cities: 5 registers of 3 bits, 16 qubits once the ancilla is added.
    ReducedEncoding e6 = ReducedEncoding::for_cities(6);
    CHECK(e6.M == 5);
    CHECK(e6.k == 3);
    CHECK(e6.data_qubits() == 15);

    ReducedEncoding e3 = ReducedEncoding::for_cities(3);
    CHECK(e3.M == 2);
    CHECK(e3.k == 1);
}

TEST_CASE("projector matches the addressed register bits") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5); // M=4, k=2
    FeasibleTour t;
    t.codes = {0, 1, 2, 3};
    BasisState s = encode_tour(enc, t);
    CHECK(projector_value(enc, s, 1, 1) == 1);
    CHECK(projector_value(enc, s, 1, 2) == 0);

    // Exactly one code matches per register, for any state.
    for (BasisState state : {s, BasisState{0xA5}, BasisState{0xFF}}) {
        for (int reg = 0; reg < enc.M; ++reg) {
            int hits = 0;
            for (int code = 0; code < enc.codes_per_register(); ++code) {
                hits += projector_value(enc, state, reg, code);
            }
            CHECK(hits == 1);
        }
    }

    CHECK_THROWS_AS(projector_value(enc, s, 4, 0), std::out_of_range);
    CHECK_THROWS_AS(projector_value(enc, s, 0, 4), std::out_of_range);
}

TEST_CASE("identity permutation packs to the documented bit pattern") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    FeasibleTour t;
    t.codes = {0, 1, 2, 3};
    CHECK(encode_tour(enc, t) == 0b11100100);
}

TEST_CASE("encode and classify round-trip every permutation") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    FeasibleTour t = FeasibleTour::canonical(4);
    int count = 0;
    do {
        BasisState s = encode_tour(enc, t);
        Classification c = classify_state(enc, s);
        REQUIRE(c.kind == StateClass::Feasible);
        CHECK(c.tour == t);
        ++count;
    } while (std::next_permutation(t.codes.begin(), t.codes.end()));
    CHECK(count == 24);
}

TEST_CASE("encode rejects non-permutations") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    FeasibleTour bad;
    bad.codes = {0, 0, 1, 2};
    CHECK_THROWS_AS(encode_tour(enc, bad), std::invalid_argument);
    bad.codes = {0, 1, 2};
    CHECK_THROWS_AS(encode_tour(enc, bad), std::invalid_argument);
}

TEST_CASE("classification separates invalid codes from repeats") {
    ReducedEncoding enc = ReducedEncoding::for_cities(4); // M=3, k=2: code 3 invalid
    BasisState with_invalid = 0b11'01'00;
    CHECK(classify_state(enc, with_invalid).kind == StateClass::InvalidCode);

    ReducedEncoding enc5 = ReducedEncoding::for_cities(5);
    FeasibleTour rep;
    rep.codes = {0, 0, 1, 2};
    BasisState s = 0;
    for (int i = 0; i < 4; ++i) s |= static_cast<BasisState>(rep.codes[i]) << (i * 2);
    CHECK(classify_state(enc5, s).kind == StateClass::RepeatedCity);
}

TEST_CASE("classification partitions the full state space") {
    for (int n : {3, 4, 5}) {
        ReducedEncoding enc = ReducedEncoding::for_cities(n);
        std::map<StateClass, long> tally;
        const std::uint64_t dim = std::uint64_t{1} << enc.data_qubits();
        for (std::uint64_t s = 0; s < dim; ++s) ++tally[classify_state(enc, s).kind];
        long total = 0;
        for (auto& [k, v] : tally) total += v;
        CHECK(total == static_cast<long>(dim));
        long fact = 1;
        for (int i = 2; i <= enc.M; ++i) fact *= i;
        CHECK(tally[StateClass::Feasible] == fact);
    }
}

TEST_CASE("feasible index set enumerates exactly the feasible states") {
    for (int n : {4, 5, 6, 7}) {
        ReducedEncoding enc = ReducedEncoding::for_cities(n);
        auto feasible = feasible_state_index_set(enc);
        long fact = 1;
        for (int i = 2; i <= enc.M; ++i) fact *= i;
        CHECK(static_cast<long>(feasible.size()) == fact);
        for (BasisState s : feasible) CHECK(classify_state(enc, s).kind == StateClass::Feasible);

        const std::uint64_t dim = std::uint64_t{1} << enc.data_qubits();
        long scan = 0;
        for (std::uint64_t s = 0; s < dim; ++s) {
            if (classify_state(enc, s).kind == StateClass::Feasible) ++scan;
        }
        CHECK(scan == static_cast<long>(feasible.size()));
    }
    CHECK_THROWS_AS(feasible_state_index_set(ReducedEncoding::for_cities(10)),
                    std::invalid_argument);
}

TEST_CASE("states render with register separators") {
    ReducedEncoding enc = ReducedEncoding::for_cities(5);
    FeasibleTour t;
    t.codes = {0, 1, 2, 3};
    CHECK(format_state(enc, encode_tour(enc, t)) == "11'10'01'00");
}

TEST_CASE("full tours round-trip through reduced codes") {
    std::vector<int> full = {0, 3, 1, 4, 2};
    FeasibleTour t = FeasibleTour::from_full_tour(full);
    CHECK(t.to_full_tour() == full);
    std::vector<int> not_rooted = {1, 0, 2};
    CHECK_THROWS_AS(FeasibleTour::from_full_tour(not_rooted), std::invalid_argument);
}

TEST_SUITE_END();
