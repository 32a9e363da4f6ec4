#pragma once

// Constant-coefficient operator symbols on the torus and their per-mode
// assembly into reduction inputs: L_hat(k) = Z + sum_j i k_j S_j with Z real
// antisymmetric and S_j real symmetric, or a user-supplied pseudodifferential
// rule k -> matrix (validated skew-adjoint at every evaluated mode).

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/errors.hpp"
#include "tsl/reduction.hpp"

namespace tsl {

using Wavevector = std::vector<int>;

inline std::string wavevector_str(const Wavevector& k) {
    std::string s = "(";
    for (size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
    return s + ")";
}

class OperatorSymbol {
public:
    OperatorSymbol() = default;

    /// Differential symbol of order at most one.
    OperatorSymbol(CMatrix zero_order, std::vector<CMatrix> first_order)
        : n_(zero_order.rows()), d_(static_cast<int>(first_order.size())),
          zero_(std::move(zero_order)), first_(std::move(first_order)) {
        validate_structured();
    }

    /// Pseudodifferential symbol given directly as a rule in k.
    OperatorSymbol(int components, int dim, std::function<CMatrix(const Wavevector&)> rule)
        : n_(components), d_(dim), custom_(std::move(rule)) {}

    static OperatorSymbol zero(int components, int dim) {
        std::vector<CMatrix> first(dim, CMatrix::zero(components, components));
        return OperatorSymbol(CMatrix::zero(components, components), std::move(first));
    }

    int components() const { return n_; }
    int dim() const { return d_; }
    bool is_custom() const { return static_cast<bool>(custom_); }

    /// Evaluate the Fourier multiplier at integer wavevector k.
    CMatrix at(const Wavevector& k) const {
        if (static_cast<int>(k.size()) != d_)
            throw DimensionMismatchError("wavevector dimension does not match symbol");
        if (custom_) {
            CMatrix m = custom_(k);
            if (m.rows() != n_ || m.cols() != n_)
                throw DimensionMismatchError("custom symbol returned wrong size");
            if (!is_skew_adjoint(m, adjoint_tol(m)))
                throw SymbolNotSkewError("custom symbol not skew-adjoint at k = " + wavevector_str(k));
            return m;
        }
        CMatrix m = zero_;
        for (int j = 0; j < d_; ++j)
            if (k[j] != 0) m += (im * static_cast<double>(k[j])) * first_[j];
        return m;
    }

private:
    void validate_structured() {
        if (!zero_.is_square()) throw DimensionMismatchError("zero-order term must be square");
        for (const auto& s : first_)
            if (s.rows() != n_ || s.cols() != n_)
                throw DimensionMismatchError("first-order term size mismatch");
        const auto real_only = [](const CMatrix& m) {
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j)
                    if (std::abs(m(i, j).imag()) > 1e-12) return false;
            return true;
        };
        if (!real_only(zero_) || !is_skew_adjoint(zero_, adjoint_tol(zero_)))
            throw SymbolNotSkewError("zero-order term must be real antisymmetric");
        for (const auto& s : first_) {
            if (!real_only(s) || !is_self_adjoint(s, adjoint_tol(s)))
                throw SymbolNotSkewError("first-order terms must be real symmetric");
        }
    }

    int n_ = 0;
    int d_ = 0;
    CMatrix zero_;
    std::vector<CMatrix> first_;
    std::function<CMatrix(const Wavevector&)> custom_;
};

/// Parse a symbol specification: "n d" then (d+1) whitespace-separated n x n
/// real matrices, zero-order first. '#' starts a comment.
inline OperatorSymbol parse_symbol_text(std::istream& in) {
    std::string cleaned, line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        cleaned += line + ' ';
    }
    std::istringstream s(cleaned);
    int n = 0, d = 0;
    if (!(s >> n >> d) || n < 1 || d < 0)
        throw ConfigError("symbol file: expected leading 'n d'");
    const auto read_matrix = [&](const char* what) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v;
                if (!(s >> v)) throw ConfigError(std::string("symbol file: truncated ") + what);
                m(i, j) = v;
            }
        return m;
    };
    CMatrix zero = read_matrix("zero-order matrix");
    std::vector<CMatrix> first;
    for (int j = 0; j < d; ++j) first.push_back(read_matrix("first-order matrix"));
    double extra;
    if (s >> extra) throw ConfigError("symbol file: trailing data");
    return OperatorSymbol(std::move(zero), std::move(first));
}

inline OperatorSymbol load_symbol_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open symbol file: " + path);
    try {
        return parse_symbol_text(f);
    } catch (const SymbolNotSkewError& e) {
        throw SymbolNotSkewError(path + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// How delta relates to eps as both tend to zero:
/// RateMatch:   delta / eps^(1+1/s) -> C, limit operator C^s T(p,p), p = s+1.
/// RateBetween: delta between consecutive matched rates, zero limit operator,
///              p = s+2.
struct ScalingRegime {
    enum class Kind { RateMatch, RateBetween };
    Kind kind = Kind::RateMatch;
    int s = 1;
    double C = 1.0;

    static ScalingRegime rate_match(int s, double C) {
        if (s < 1 || C <= 0.0) throw ConfigError("rate_match requires s >= 1 and C > 0");
        return {Kind::RateMatch, s, C};
    }
    static ScalingRegime rate_between(int s) {
        if (s < 1) throw ConfigError("rate_between requires s >= 1");
        return {Kind::RateBetween, s, 0.0};
    }
    int p() const { return kind == Kind::RateMatch ? s + 1 : s + 2; }
};

/// Assemble the per-mode reduction input (L_hat(k), M_hat(k)).
inline SymbolPair mode_pair(const OperatorSymbol& lsym, const OperatorSymbol& msym,
                            const Wavevector& k) {
    if (lsym.components() != msym.components())
        throw DimensionMismatchError("operator symbols must share the component count");
    CMatrix l = lsym.at(k), m = msym.at(k);
    if (!is_skew_adjoint(l, adjoint_tol(l)))
        throw SymbolNotSkewError("L symbol not skew-adjoint at k = " + wavevector_str(k));
    if (!is_skew_adjoint(m, adjoint_tol(m)))
        throw SymbolNotSkewError("M symbol not skew-adjoint at k = " + wavevector_str(k));
    return SymbolPair{std::move(l), std::move(m), AdjointKind::SkewAdjoint};
}

struct LimitMode {
    CMatrix projection; ///< P_hat(k)
    CMatrix tlim;       ///< T_lim_hat(k), supported inside range(projection)
};

/// Reduce the mode pair at the depth fixed by the regime and read off the
/// limit projection and limit multiplier.
inline LimitMode limit_projector(const OperatorSymbol& lsym, const OperatorSymbol& msym,
                                 const ScalingRegime& regime, const Wavevector& k,
                                 double tau_rank = 1e-10) {
    const ReductionOutput red = reduce(mode_pair(lsym, msym, k), regime.p(), tau_rank);
    LimitMode out;
    out.projection = red.limit_projection;
    if (regime.kind == ScalingRegime::Kind::RateMatch) {
        const double cs = std::pow(regime.C, regime.s);
        // T(p,p) is already supported in range(P); the sandwich only removes roundoff
        out.tlim = out.projection * (cs * red.tpp) * out.projection;
    } else {
        out.tlim = CMatrix::zero(red.tpp.rows(), red.tpp.cols());
    }
    return out;
}

} // namespace tsl
