#ifndef TRSB_TYPES_HPP
#define TRSB_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

// Conventions used throughout the library (fixed once, relied on everywhere):
//
//   * Sites are numbered 1..N. A basis state |b1 b2 ... bN> is encoded as the
//     integer with b1 in the most significant bit, so |100> on N=3 is index 4.
//   * sigma^z |1> = +|1>, with |1> the excited/occupied state. Consequently
//     -delta * sigma_k^z lowers the energy of states with site k occupied.
//   * All couplings are angular frequencies and all times are in the matching
//     reciprocal units. Conversion from cycles-per-unit inputs (a factor 2*pi)
//     happens only at the CLI boundary.
//   * Dense complex matrices only; the full space is capped at N <= 14 sites.

namespace trsb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxSites = 14;
inline constexpr Complex kI{0.0, 1.0};

/// Identifies the space a matrix or amplitude vector lives in: the full
/// 2^N space (excitation == nullopt) or one fixed-excitation block.
struct BasisId {
    int sites = 0;
    std::optional<int> excitation;

    friend bool operator==(const BasisId&, const BasisId&) = default;

    static BasisId full(int n) { return {n, std::nullopt}; }
    static BasisId block(int n, int m) { return {n, m}; }
};

struct Operator {
    BasisId basis;
    Matrix matrix;
    bool hermitian = false;
};

struct StateVector {
    BasisId basis;
    Vector amplitudes;
};

// --- bit helpers (site 1 = MSB) ---

inline std::uint32_t site_mask(int sites, int site) {
    return std::uint32_t{1} << (sites - site);
}

inline bool site_occupied(std::uint32_t state, int sites, int site) {
    return (state & site_mask(sites, site)) != 0;
}

inline int excitation_count(std::uint32_t state) {
    return __builtin_popcount(state);
}

inline std::string bitstring(std::uint32_t state, int sites) {
    std::string s(sites, '0');
    for (int k = 1; k <= sites; ++k)
        if (site_occupied(state, sites, k)) s[k - 1] = '1';
    return s;
}

inline std::uint32_t parse_bitstring(const std::string& s) {
    std::uint32_t state = 0;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bitstring must contain only 0/1: " + s);
        state = (state << 1) | std::uint32_t(c - '0');
    }
    return state;
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double rel_tol = 1e-12) {
    double scale = max_abs(m);
    if (scale == 0.0) return true;
    return max_abs(m - m.adjoint()) < rel_tol * scale;
}

inline void require_hermitian(const Matrix& m, const char* what) {
    if (!is_hermitian(m))
        throw std::runtime_error(std::string(what) + ": matrix failed the hermiticity check");
}

inline void check_sites(int sites, int min_sites = 2) {
    if (sites < min_sites || sites > kMaxSites)
        throw std::invalid_argument("site count must be in [" + std::to_string(min_sites) +
                                    ", " + std::to_string(kMaxSites) + "], got " +
                                    std::to_string(sites));
}

}  // namespace trsb

#endif
