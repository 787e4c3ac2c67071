#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

#include "labeled_trellis.hpp"

namespace tcnoma {

/// Transmit powers of the two users (linear, relative units).
struct PowerPair {
    double p1 = 0.0;
    double p2 = 0.0;

    PowerPair() = default;
    PowerPair(double a, double b) : p1(a), p2(b)
    {
        if (!std::isfinite(p1) || !std::isfinite(p2) || p1 < 0.0 || p2 < 0.0)
            throw std::invalid_argument("power pair: powers must be finite and non-negative");
    }

    /// p1 = ratio/(1+ratio)*budget, p2 = budget - p1.
    static PowerPair from_ratio(double ratio, double budget = 1.0)
    {
        if (!(ratio >= 0.0) || !(budget > 0.0))
            throw std::invalid_argument("power pair: ratio must be >= 0 and budget > 0");
        const double p1 = ratio / (1.0 + ratio) * budget;
        return {p1, budget - p1};
    }

    double total() const { return p1 + p2; }
    double ratio() const { return p1 / p2; }

    /// 0 < p1 < p2, and p1 + p2 <= budget when given.
    void require_ordered(std::optional<double> budget = std::nullopt) const
    {
        if (!(p1 > 0.0) || !(p1 < p2))
            throw std::invalid_argument("power pair: require 0 < p1 < p2 (got p1=" +
                                        std::to_string(p1) + ", p2=" + std::to_string(p2) + ")");
        if (budget && p1 + p2 > *budget * (1.0 + 1e-12))
            throw std::invalid_argument("power pair: p1 + p2 exceeds budget");
    }

    friend bool operator==(const PowerPair&, const PowerPair&) = default;
};

/// Back-reference of a product label to the constituent transitions.
struct LabelOrigin {
    unsigned branch1, parallel1, branch2, parallel2;
    friend bool operator==(const LabelOrigin&, const LabelOrigin&) = default;
};

/// Tensor product T1 (x) T2 with superimposed labels sqrt(P1)*u + sqrt(P2)*v.
/// Product state s1*r2 + s2; product branch b1*B2 + b2; product parallel
/// index p1*M2 + p2.
class ProductTrellis {
public:
    ProductTrellis(Trellis t1, Trellis t2, PowerPair powers, Constellation c1, Constellation c2)
        : t1_(std::move(t1)), t2_(std::move(t2)), c1_(std::move(c1)), c2_(std::move(c2)),
          powers_(powers), labeled_(build())
    {
    }

    const Trellis& first() const { return t1_; }
    const Trellis& second() const { return t2_; }
    const Constellation& first_constellation() const { return c1_; }
    const Constellation& second_constellation() const { return c2_; }
    const PowerPair& powers() const { return powers_; }
    const LabeledTrellis& labeled() const { return labeled_; }

    std::size_t num_states() const { return labeled_.num_states(); }
    std::size_t parallel() const { return labeled_.parallel(); }
    std::size_t tail_length() const { return labeled_.tail_length(); }

    unsigned product_state(unsigned s1, unsigned s2) const
    {
        return s1 * unsigned(t2_.num_states()) + s2;
    }
    std::pair<unsigned, unsigned> split_state(unsigned s) const
    {
        const auto r2 = unsigned(t2_.num_states());
        return {s / r2, s % r2};
    }

    LabelOrigin origin(unsigned branch, unsigned parallel) const
    {
        const auto nb2 = unsigned(t2_.branches_per_state());
        const auto np2 = unsigned(t2_.parallel_count());
        return {branch / nb2, parallel / np2, branch % nb2, parallel % np2};
    }

    /// One line per product edge: "s -> n : re,im re,im ...".
    void dump(std::ostream& out) const
    {
        char buf[64];
        for (unsigned s = 0; s < labeled_.num_states(); ++s)
            for (unsigned b = 0; b < labeled_.branches(); ++b) {
                out << s << " -> " << labeled_.next_state(s, b) << " :";
                for (unsigned p = 0; p < labeled_.parallel(); ++p) {
                    const cplx& l = labeled_.label(s, b, p);
                    std::snprintf(buf, sizeof buf, " %.6f,%.6f", clean(l.real()), clean(l.imag()));
                    out << buf;
                }
                out << '\n';
            }
    }

private:
    static double clean(double v) { return std::abs(v) < 5e-7 ? 0.0 : v; }

    LabeledTrellis build() const
    {
        if (t1_.max_label() >= c1_.size() || t2_.max_label() >= c2_.size())
            throw std::invalid_argument("tensor product: labels exceed constellation size");
        const std::size_t r1 = t1_.num_states(), r2 = t2_.num_states();
        const std::size_t nb1 = t1_.branches_per_state(), nb2 = t2_.branches_per_state();
        const std::size_t np1 = t1_.parallel_count(), np2 = t2_.parallel_count();
        const std::size_t ns = r1 * r2, nb = nb1 * nb2, np = np1 * np2;
        const std::size_t tail_len = std::max(t1_.tail_length(), t2_.tail_length());
        for (unsigned s = 0; s < r1; ++s)
            if (!t1_.can_reach_zero(s, tail_len))
                throw std::invalid_argument("tensor product: first trellis cannot terminate in " +
                                            std::to_string(tail_len) + " steps");
        for (unsigned s = 0; s < r2; ++s)
            if (!t2_.can_reach_zero(s, tail_len))
                throw std::invalid_argument("tensor product: second trellis cannot terminate in " +
                                            std::to_string(tail_len) + " steps");

        const double a1 = std::sqrt(powers_.p1), a2 = std::sqrt(powers_.p2);
        std::vector<unsigned> next(ns * nb);
        std::vector<cplx> labels(ns * nb * np);
        for (unsigned s1 = 0; s1 < r1; ++s1)
            for (unsigned s2 = 0; s2 < r2; ++s2) {
                const std::size_t s = s1 * r2 + s2;
                for (unsigned b1 = 0; b1 < nb1; ++b1)
                    for (unsigned b2 = 0; b2 < nb2; ++b2) {
                        const Branch& e1 = t1_.branch(s1, b1);
                        const Branch& e2 = t2_.branch(s2, b2);
                        const std::size_t b = b1 * nb2 + b2;
                        next[s * nb + b] = unsigned(e1.next_state * r2 + e2.next_state);
                        for (unsigned q1 = 0; q1 < np1; ++q1)
                            for (unsigned q2 = 0; q2 < np2; ++q2)
                                labels[(s * nb + b) * np + q1 * np2 + q2] =
                                    a1 * c1_[e1.labels[q1]] + a2 * c2_[e2.labels[q2]];
                    }
            }

        std::vector<unsigned> tails(tail_len * ns, unsigned(-1));
        for (std::size_t k = 1; k <= tail_len; ++k)
            for (unsigned s1 = 0; s1 < r1; ++s1)
                for (unsigned s2 = 0; s2 < r2; ++s2)
                    if (t1_.can_reach_zero(s1, k) && t2_.can_reach_zero(s2, k))
                        tails[(k - 1) * ns + s1 * r2 + s2] =
                            unsigned(t1_.tail_input(s1, k) * nb2 + t2_.tail_input(s2, k));
        return {ns, nb, np, std::move(next), std::move(labels), std::move(tails), tail_len};
    }

    Trellis t1_, t2_;
    Constellation c1_, c2_;
    PowerPair powers_;
    LabeledTrellis labeled_;
};

inline ProductTrellis tensor_product(const Trellis& t1, const Trellis& t2, PowerPair powers,
                                     const Constellation& c1, const Constellation& c2)
{
    return {t1, t2, powers, c1, c2};
}

enum class DetectionMode { Joint, Separate };

/// Add-compare-select work for N steps: N(K1K2 + L1L2) joint,
/// N(K1 + K2 + L1 + L2) separate; L counts parallel edges.
inline std::uint64_t complexity_estimate(const Trellis& t1, const Trellis& t2, std::uint64_t n,
                                         DetectionMode mode)
{
    const std::uint64_t k1 = t1.num_states(), k2 = t2.num_states();
    const std::uint64_t l1 = t1.num_edges(), l2 = t2.num_edges();
    return mode == DetectionMode::Joint ? n * (k1 * k2 + l1 * l2) : n * (k1 + k2 + l1 + l2);
}

} // namespace tcnoma
