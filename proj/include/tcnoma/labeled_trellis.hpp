#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "constellation.hpp"
#include "trellis.hpp"

namespace tcnoma {

/// Flat decoding view of a trellis: next states, complex branch labels and
/// the forced tail table, laid out for the Viterbi inner loop.
class LabeledTrellis {
public:
    LabeledTrellis(std::size_t num_states, std::size_t branches, std::size_t parallel,
                   std::vector<unsigned> next, std::vector<cplx> labels,
                   std::vector<unsigned> tail, std::size_t tail_length)
        : num_states_(num_states), branches_(branches), parallel_(parallel),
          tail_length_(tail_length), next_(std::move(next)), labels_(std::move(labels)),
          tail_(std::move(tail))
    {
        if (next_.size() != num_states_ * branches_ ||
            labels_.size() != num_states_ * branches_ * parallel_ ||
            tail_.size() != tail_length_ * num_states_)
            throw std::invalid_argument("labeled trellis: inconsistent table sizes");
    }

    std::size_t num_states() const { return num_states_; }
    std::size_t branches() const { return branches_; }
    std::size_t parallel() const { return parallel_; }
    std::size_t tail_length() const { return tail_length_; }

    unsigned next_state(unsigned s, unsigned b) const { return next_[s * branches_ + b]; }
    const cplx& label(unsigned s, unsigned b, unsigned p) const
    {
        return labels_[(s * branches_ + b) * parallel_ + p];
    }
    /// Forced branch from state s with `remaining` tail steps left.
    unsigned tail_branch(unsigned s, std::size_t remaining) const
    {
        return tail_[(remaining - 1) * num_states_ + s];
    }

    std::span<const cplx> labels() const { return labels_; }

private:
    std::size_t num_states_, branches_, parallel_, tail_length_;
    std::vector<unsigned> next_;
    std::vector<cplx> labels_;
    std::vector<unsigned> tail_;
};

inline LabeledTrellis label_trellis(const Trellis& t, const Constellation& c,
                                    std::optional<std::size_t> tail = std::nullopt)
{
    if (t.max_label() >= c.size())
        throw std::invalid_argument("label_trellis: trellis labels exceed constellation size");
    const std::size_t ns = t.num_states(), nb = t.branches_per_state(), np = t.parallel_count();
    const std::size_t tail_len = tail.value_or(t.tail_length());
    std::vector<unsigned> next(ns * nb);
    std::vector<cplx> labels(ns * nb * np);
    std::vector<unsigned> tails(tail_len * ns);
    for (unsigned s = 0; s < ns; ++s)
        for (unsigned b = 0; b < nb; ++b) {
            const Branch& br = t.branch(s, b);
            next[s * nb + b] = br.next_state;
            for (unsigned p = 0; p < np; ++p)
                labels[(s * nb + b) * np + p] = c[br.labels[p]];
        }
    for (std::size_t k = 1; k <= tail_len; ++k)
        for (unsigned s = 0; s < ns; ++s)
            tails[(k - 1) * ns + s] =
                t.can_reach_zero(s, k) ? t.tail_input(s, k) : unsigned(-1);
    return {ns, nb, np, std::move(next), std::move(labels), std::move(tails), tail_len};
}

} // namespace tcnoma
