#include <algorithm>
#include <cmath>
#include <string>

#include "cqed/exact.hpp"

namespace cqed {

namespace {

// Unique integer key for a sparse occupation list; supports total caps up to
// 6 before the digit encoding could overflow 64 bits.
constexpr int kMaxTotalCap = 6;

} // namespace

std::uint64_t CIBasis::occupation_key(const std::pair<std::uint16_t, std::uint8_t>* entries,
                                      std::size_t count) const {
    const std::uint64_t base =
        static_cast<std::uint64_t>(mode_index.size()) * (per_mode_cap + 1) + 1;
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t digit =
            static_cast<std::uint64_t>(entries[i].first) * (per_mode_cap + 1) + entries[i].second;
        key = key * base + digit + 1;
    }
    return key;
}

void CIBasis::push_occupation(const std::vector<std::uint8_t>& occ_vector) {
    int total = 0;
    for (std::size_t slot = 0; slot < occ_vector.size(); ++slot) {
        if (occ_vector[slot] == 0) continue;
        occ_entries_.emplace_back(static_cast<std::uint16_t>(slot), occ_vector[slot]);
        total += occ_vector[slot];
    }
    occ_offsets_.push_back(static_cast<std::uint32_t>(occ_entries_.size()));
    occ_total_.push_back(static_cast<std::uint16_t>(total));
}

void CIBasis::finalize_index() {
    sector_start_.assign(total_cap + 2, 0);
    const std::size_t n = occupation_count();
    occ_lookup_.reserve(2 * n);
    for (std::size_t occ = 0; occ < n; ++occ) {
        const auto [entries, count] = occupation(occ);
        occ_lookup_[occupation_key(entries, count)] = static_cast<std::uint32_t>(occ);
    }
    // Graded enumeration: the first index of each shell.
    int shell = 0;
    sector_start_[0] = 0;
    for (std::size_t occ = 0; occ < n; ++occ) {
        while (occ_total_[occ] > shell) sector_start_[++shell] = static_cast<std::uint32_t>(occ);
    }
    while (shell <= total_cap) sector_start_[++shell] = static_cast<std::uint32_t>(n);
}

bool CIBasis::lower(std::size_t occ, int slot, std::size_t& occ_out, double& amp) const {
    const auto [entries, count] = occupation(occ);
    std::pair<std::uint16_t, std::uint8_t> scratch[kMaxTotalCap + 1];
    std::size_t out_count = 0;
    int n = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (entries[i].first == slot) {
            n = entries[i].second;
            if (n > 1) scratch[out_count++] = {entries[i].first, static_cast<std::uint8_t>(n - 1)};
        } else {
            scratch[out_count++] = entries[i];
        }
    }
    if (n == 0) return false;
    const auto it = occ_lookup_.find(occupation_key(scratch, out_count));
    if (it == occ_lookup_.end()) throw std::logic_error("ci basis: broken occupation index");
    occ_out = it->second;
    amp = std::sqrt(static_cast<double>(n));
    return true;
}

bool CIBasis::raise(std::size_t occ, int slot, std::size_t& occ_out, double& amp) const {
    const auto [entries, count] = occupation(occ);
    if (total_quanta(occ) + 1 > total_cap) return false;
    std::pair<std::uint16_t, std::uint8_t> scratch[kMaxTotalCap + 1];
    std::size_t out_count = 0;
    int n = 0;
    bool inserted = false;
    for (std::size_t i = 0; i < count; ++i) {
        if (entries[i].first == slot) {
            n = entries[i].second;
            if (n + 1 > per_mode_cap) return false;
            scratch[out_count++] = {entries[i].first, static_cast<std::uint8_t>(n + 1)};
            inserted = true;
        } else {
            if (!inserted && entries[i].first > slot) {
                scratch[out_count++] = {static_cast<std::uint16_t>(slot), 1};
                inserted = true;
            }
            scratch[out_count++] = entries[i];
        }
    }
    if (!inserted) scratch[out_count++] = {static_cast<std::uint16_t>(slot), 1};
    const auto it = occ_lookup_.find(occupation_key(scratch, out_count));
    if (it == occ_lookup_.end()) throw std::logic_error("ci basis: broken occupation index");
    occ_out = it->second;
    amp = std::sqrt(static_cast<double>(n + 1));
    return true;
}

std::uint64_t count_occupations(int n_slots, int per_mode_cap, int total_cap) {
    // DP over slots; dp[t] = occupations with total exactly t. Saturates.
    constexpr std::uint64_t kCap = ~0ULL;
    std::vector<std::uint64_t> dp(total_cap + 1, 0);
    dp[0] = 1;
    for (int slot = 0; slot < n_slots; ++slot) {
        std::vector<std::uint64_t> next(total_cap + 1, 0);
        for (int t = 0; t <= total_cap; ++t) {
            if (dp[t] == 0) continue;
            for (int q = 0; q <= per_mode_cap && t + q <= total_cap; ++q) {
                const std::uint64_t add = dp[t];
                next[t + q] = (next[t + q] > kCap - add) ? kCap : next[t + q] + add;
            }
        }
        dp.swap(next);
    }
    std::uint64_t total = 0;
    for (std::uint64_t v : dp) total = (total > kCap - v) ? kCap : total + v;
    return total;
}

CIBasis enumerate_basis(const AtomModel& atom, const CavityModel& cavity, int per_mode_cap,
                        int total_cap, std::uint64_t max_states, bool include_decoupled) {
    atom.validate();
    cavity.validate();
    if (per_mode_cap < 1 || total_cap < 1)
        throw config_error("ci basis: caps must be at least 1");
    if (total_cap > kMaxTotalCap)
        throw config_error("ci basis: total_cap above " + std::to_string(kMaxTotalCap) +
                           " is not supported");

    CIBasis basis;
    basis.atom_levels = atom.levels;
    basis.per_mode_cap = std::min(per_mode_cap, total_cap);
    basis.total_cap = total_cap;
    for (int a = 0; a < cavity.n_modes; ++a) {
        if (cavity.couplings[a] == 0.0 && !include_decoupled) continue;
        basis.mode_index.push_back(a);
        basis.mode_omega.push_back(cavity.frequencies[a]);
        basis.mode_coupling.push_back(cavity.couplings[a]);
    }
    const int n_slots = static_cast<int>(basis.mode_index.size());
    if (n_slots == 0) throw config_error("ci basis: no coupled modes");
    if (n_slots > 65535) throw config_error("ci basis: too many coupled modes");

    const std::uint64_t occ_count = count_occupations(n_slots, basis.per_mode_cap, total_cap);
    const std::uint64_t dim = occ_count * static_cast<std::uint64_t>(atom.levels);
    if (occ_count == ~0ULL || dim > max_states)
        throw config_error("ci basis: dimension " + std::to_string(dim) +
                           " exceeds the configured budget of " + std::to_string(max_states) +
                           " states");

    // Graded, descending-lexicographic enumeration of occupations.
    std::vector<std::uint8_t> occ(n_slots, 0);
    auto emit = [&]() { basis.push_occupation(occ); };
    auto gen = [&](auto&& self, int slot, int remaining) -> void {
        if (remaining == 0) {
            emit();
            return;
        }
        if (slot >= n_slots) return;
        const int q_max = std::min(basis.per_mode_cap, remaining);
        for (int q = q_max; q >= 0; --q) {
            occ[slot] = static_cast<std::uint8_t>(q);
            self(self, slot + 1, remaining - q);
        }
        occ[slot] = 0;
    };
    for (int shell = 0; shell <= total_cap; ++shell) gen(gen, 0, shell);
    basis.finalize_index();
    return basis;
}

} // namespace cqed
