#include "qtsp/encoding.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>

namespace qtsp {

ReducedEncoding ReducedEncoding::for_cities(int n) {
    if (n < 3) throw std::invalid_argument("ReducedEncoding: need at least 3 cities");
    ReducedEncoding enc;
    enc.n = n;
    enc.M = n - 1;
    enc.k = 1;
    while ((1 << enc.k) < enc.M) ++enc.k;
    if (enc.data_qubits() > 63) throw std::invalid_argument("ReducedEncoding: too many data qubits");
    return enc;
}

std::vector<int> FeasibleTour::to_full_tour() const {
    std::vector<int> full(codes.size() + 1);
    full[0] = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) full[i + 1] = codes[i] + 1;
    return full;
}

FeasibleTour FeasibleTour::from_full_tour(std::span<const int> full) {
    if (full.empty() || full[0] != 0) {
        throw std::invalid_argument("FeasibleTour: full tour must start at city 0");
    }
    FeasibleTour t;
    t.codes.resize(full.size() - 1);
    for (std::size_t i = 1; i < full.size(); ++i) {
        t.codes[i - 1] = static_cast<std::uint8_t>(full[i] - 1);
    }
    return t;
}

FeasibleTour FeasibleTour::canonical(int M) {
    FeasibleTour t;
    t.codes.resize(M);
    std::iota(t.codes.begin(), t.codes.end(), std::uint8_t{0});
    return t;
}

namespace {

bool is_code_permutation(const ReducedEncoding& enc, const std::vector<std::uint8_t>& codes) {
    if (static_cast<int>(codes.size()) != enc.M) return false;
    std::uint64_t seen = 0;
    for (std::uint8_t c : codes) {
        if (c >= enc.M || (seen >> c) & 1) return false;
        seen |= std::uint64_t{1} << c;
    }
    return true;
}

} // namespace

int projector_value(const ReducedEncoding& enc, BasisState state, int reg, int code) {
    if (reg < 0 || reg >= enc.M) throw std::out_of_range("projector_value: register out of range");
    if (code < 0 || code >= enc.codes_per_register()) {
        throw std::out_of_range("projector_value: code out of range");
    }
    return enc.code_at(state, reg) == code ? 1 : 0;
}

BasisState encode_tour(const ReducedEncoding& enc, const FeasibleTour& tour) {
    if (!is_code_permutation(enc, tour.codes)) {
        throw std::invalid_argument("encode_tour: codes are not a permutation");
    }
    BasisState state = 0;
    for (int i = 0; i < enc.M; ++i) {
        state |= static_cast<BasisState>(tour.codes[i]) << (i * enc.k);
    }
    return state;
}

Classification classify_state(const ReducedEncoding& enc, BasisState state) {
    std::uint64_t seen = 0;
    bool repeated = false;
    for (int i = 0; i < enc.M; ++i) {
        int code = enc.code_at(state, i);
        if (code >= enc.M) return {StateClass::InvalidCode, {}};
        if ((seen >> code) & 1) repeated = true;
        seen |= std::uint64_t{1} << code;
    }
    if (repeated) return {StateClass::RepeatedCity, {}};
    Classification c{StateClass::Feasible, {}};
    c.tour.codes.resize(enc.M);
    for (int i = 0; i < enc.M; ++i) c.tour.codes[i] = static_cast<std::uint8_t>(enc.code_at(state, i));
    return c;
}

std::vector<BasisState> feasible_state_index_set(const ReducedEncoding& enc, int cap) {
    if (enc.M > cap) throw std::invalid_argument("feasible_state_index_set: M exceeds cap");
    FeasibleTour t = FeasibleTour::canonical(enc.M);
    std::vector<BasisState> states;
    do {
        states.push_back(encode_tour(enc, t));
    } while (std::next_permutation(t.codes.begin(), t.codes.end()));
    std::sort(states.begin(), states.end());
    return states;
}

std::string format_state(const ReducedEncoding& enc, BasisState state) {
    std::string s;
    for (int b = enc.data_qubits() - 1; b >= 0; --b) {
        s.push_back(((state >> b) & 1) ? '1' : '0');
        if (b > 0 && b % enc.k == 0) s.push_back('\'');
    }
    return s;
}

} // namespace qtsp
