#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "constellation.hpp"

namespace tcnoma {

using Bits = std::vector<std::uint8_t>;

/// One state transition. `labels` lists the constellation indices of the
/// parallel transitions, ordered by the value of the parallel-select bits.
struct Branch {
    unsigned next_state = 0;
    std::vector<unsigned> labels;

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Regular finite-state trellis. Branch `b` of a state is taken when the
/// branch-select bits (MSB first) read `b`; parallel label `p` is chosen by
/// the parallel-select bits that follow them.
class Trellis {
public:
    explicit Trellis(std::vector<std::vector<Branch>> edges) : edges_(std::move(edges))
    {
        validate_shape();
        compute_termination();
    }

    std::size_t num_states() const { return edges_.size(); }
    std::size_t branches_per_state() const { return edges_.front().size(); }
    std::size_t parallel_count() const { return edges_.front().front().labels.size(); }
    unsigned branch_bits() const { return unsigned(std::countr_zero(branches_per_state())); }
    unsigned parallel_bits() const { return unsigned(std::countr_zero(parallel_count())); }
    unsigned bits_per_step() const { return branch_bits() + parallel_bits(); }

    /// Total number of edges counting every parallel transition.
    std::size_t num_edges() const { return num_states() * branches_per_state() * parallel_count(); }

    const Branch& branch(unsigned state, unsigned input) const { return edges_.at(state).at(input); }
    const std::vector<std::vector<Branch>>& edges() const { return edges_; }

    unsigned max_label() const
    {
        unsigned m = 0;
        for (const auto& st : edges_)
            for (const auto& br : st)
                for (unsigned l : br.labels)
                    m = std::max(m, l);
        return m;
    }

    /// Smallest t such that every state reaches state 0 in exactly t steps.
    std::size_t tail_length() const { return tail_length_; }

    bool can_reach_zero(unsigned state, std::size_t steps) const
    {
        if (steps >= reach_.size())
            throw std::invalid_argument("trellis: termination horizon exceeded");
        return reach_[steps][state] != 0;
    }

    /// Forced branch input while `remaining` tail steps are left: the lowest
    /// branch whose next state still reaches 0 in `remaining - 1` steps.
    unsigned tail_input(unsigned state, std::size_t remaining) const
    {
        if (remaining == 0)
            throw std::invalid_argument("trellis: no tail steps remaining");
        for (unsigned b = 0; b < branches_per_state(); ++b)
            if (can_reach_zero(edges_[state][b].next_state, remaining - 1))
                return b;
        throw std::invalid_argument("trellis: state " + std::to_string(state) +
                                    " cannot terminate in " + std::to_string(remaining) +
                                    " steps");
    }

    friend bool operator==(const Trellis& a, const Trellis& b) { return a.edges_ == b.edges_; }

private:
    void validate_shape()
    {
        if (edges_.empty())
            throw std::invalid_argument("trellis: no states");
        const std::size_t nb = edges_.front().size();
        if (nb == 0 || !std::has_single_bit(nb))
            throw std::invalid_argument("trellis: branches per state must be a power of two");
        if (edges_.front().front().labels.empty())
            throw std::invalid_argument("trellis: branch without labels");
        const std::size_t np = edges_.front().front().labels.size();
        if (!std::has_single_bit(np))
            throw std::invalid_argument("trellis: parallel multiplicity must be a power of two");
        for (std::size_t s = 0; s < edges_.size(); ++s) {
            if (edges_[s].size() != nb)
                throw std::invalid_argument("trellis: state " + std::to_string(s) +
                                            " has a different branch count");
            for (const auto& br : edges_[s]) {
                if (br.labels.size() != np)
                    throw std::invalid_argument("trellis: state " + std::to_string(s) +
                                                " has a different parallel multiplicity");
                if (br.next_state >= edges_.size())
                    throw std::invalid_argument("trellis: next state out of range");
            }
        }
    }

    void compute_termination()
    {
        const std::size_t ns = num_states();

        // forward reachability from state 0
        std::vector<char> seen(ns, 0);
        std::vector<unsigned> frontier{0};
        seen[0] = 1;
        for (std::size_t step = 0; step < ns && !frontier.empty(); ++step) {
            std::vector<unsigned> next;
            for (unsigned s : frontier)
                for (const auto& br : edges_[s])
                    if (!seen[br.next_state]) {
                        seen[br.next_state] = 1;
                        next.push_back(br.next_state);
                    }
            frontier = std::move(next);
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw std::invalid_argument("trellis: some state is unreachable from state 0");

        // reach_[k][s]: s reaches 0 in exactly k steps
        const std::size_t horizon = 4 * ns + 4;
        reach_.assign(horizon + 1, std::vector<char>(ns, 0));
        reach_[0][0] = 1;
        for (std::size_t k = 1; k <= horizon; ++k)
            for (std::size_t s = 0; s < ns; ++s)
                for (const auto& br : edges_[s])
                    if (reach_[k - 1][br.next_state])
                        reach_[k][s] = 1;

        std::vector<char> within(ns, 0);
        for (std::size_t k = 0; k <= ns; ++k)
            for (std::size_t s = 0; s < ns; ++s)
                within[s] |= reach_[k][s];
        if (std::find(within.begin(), within.end(), 0) != within.end())
            throw std::invalid_argument("trellis: some state cannot reach state 0");

        for (std::size_t k = 0; k <= horizon; ++k)
            if (std::all_of(reach_[k].begin(), reach_[k].end(), [](char c) { return c != 0; })) {
                tail_length_ = k;
                return;
            }
        throw std::invalid_argument("trellis: no common termination length");
    }

    std::vector<std::vector<Branch>> edges_;
    std::vector<std::vector<char>> reach_;
    std::size_t tail_length_ = 0;
};

/// The 4-state 8-PSK Ungerboeck code. Subsets A={0,4}, B={2,6}, C={1,5},
/// D={3,7}; x1 selects the branch, x2 the parallel label (0 -> m, 1 -> m+4).
inline Trellis build_ungerboeck_4state()
{
    const std::vector<unsigned> A{0, 4}, B{2, 6}, C{1, 5}, D{3, 7};
    return Trellis({
        {{0, A}, {1, B}},
        {{2, C}, {3, D}},
        {{0, B}, {1, A}},
        {{2, D}, {3, C}},
    });
}

/// Single-state, single-label trellis; a user that always sends point 0.
inline Trellis build_trivial_trellis()
{
    return Trellis(std::vector<std::vector<Branch>>{{Branch{0, {0}}}});
}

/// Information bits for N trellis steps.
struct InfoFrame {
    Bits bits;
    std::size_t steps = 0;

    InfoFrame(Bits b, std::size_t n) : bits(std::move(b)), steps(n)
    {
        if (steps == 0)
            throw std::invalid_argument("info frame: at least one step required");
    }
};

/// Branch and parallel inputs for step `n` of `bits`.
inline std::pair<unsigned, unsigned> step_inputs(const Trellis& t, const Bits& bits, std::size_t n)
{
    const std::size_t base = n * t.bits_per_step();
    unsigned b = 0, p = 0;
    for (unsigned i = 0; i < t.branch_bits(); ++i)
        b = (b << 1) | (bits[base + i] & 1u);
    for (unsigned i = 0; i < t.parallel_bits(); ++i)
        p = (p << 1) | (bits[base + t.branch_bits() + i] & 1u);
    return {b, p};
}

inline void append_step_bits(const Trellis& t, unsigned branch, unsigned parallel, Bits& out)
{
    for (unsigned i = t.branch_bits(); i-- > 0;)
        out.push_back(std::uint8_t((branch >> i) & 1u));
    for (unsigned i = t.parallel_bits(); i-- > 0;)
        out.push_back(std::uint8_t((parallel >> i) & 1u));
}

struct Codeword {
    std::vector<cplx> symbols;    // N + tail
    std::vector<unsigned> labels; // constellation indices, N + tail
    std::vector<unsigned> states; // N + tail + 1, starts and ends at 0
    std::size_t info_steps = 0;
};

/// TCM encoding from state 0 followed by a forced tail back to state 0
/// (tail branches from Trellis::tail_input, parallel input 0).
inline Codeword encode(const Trellis& t, const InfoFrame& frame, const Constellation& c,
                       std::optional<std::size_t> tail = std::nullopt)
{
    if (frame.bits.size() != frame.steps * t.bits_per_step())
        throw std::invalid_argument("encode: frame holds " + std::to_string(frame.bits.size()) +
                                    " bits, expected " +
                                    std::to_string(frame.steps * t.bits_per_step()));
    if (t.max_label() >= c.size())
        throw std::invalid_argument("encode: trellis labels exceed constellation size");
    const std::size_t tail_len = tail.value_or(t.tail_length());

    Codeword cw;
    cw.info_steps = frame.steps;
    cw.symbols.reserve(frame.steps + tail_len);
    cw.labels.reserve(frame.steps + tail_len);
    cw.states.reserve(frame.steps + tail_len + 1);
    unsigned state = 0;
    cw.states.push_back(state);
    auto emit = [&](unsigned b, unsigned p) {
        const Branch& br = t.branch(state, b);
        cw.labels.push_back(br.labels[p]);
        cw.symbols.push_back(c[br.labels[p]]);
        state = br.next_state;
        cw.states.push_back(state);
    };
    for (std::size_t n = 0; n < frame.steps; ++n) {
        auto [b, p] = step_inputs(t, frame.bits, n);
        emit(b, p);
    }
    for (std::size_t k = tail_len; k > 0; --k)
        emit(t.tail_input(state, k), 0);
    return cw;
}

/// Plain-text trellis table, one branch per line:
///   <state> <input bits> <next state> <label> [<label> ...]
/// '#' starts a comment. Input bits are the branch-select bits written as a
/// binary string ("-" when the trellis has a single branch per state).
inline Trellis parse_trellis(std::istream& in)
{
    struct Row {
        unsigned state, input, next;
        std::vector<unsigned> labels;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t input_width = 0;
    bool width_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        std::istringstream ls(line);
        std::string state_tok, input_tok;
        if (!(ls >> state_tok))
            continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("trellis text line " + std::to_string(lineno) + ": " + why);
        };
        Row r{};
        try {
            r.state = unsigned(std::stoul(state_tok));
        } catch (const std::exception&) {
            fail("bad state '" + state_tok + "'");
        }
        if (!(ls >> input_tok))
            fail("missing input bits");
        std::size_t width = 0;
        if (input_tok != "-") {
            for (char ch : input_tok) {
                if (ch != '0' && ch != '1')
                    fail("input bits must be 0/1");
                r.input = (r.input << 1) | unsigned(ch - '0');
            }
            width = input_tok.size();
        }
        if (width_set && width != input_width)
            fail("inconsistent input bit width");
        input_width = width;
        width_set = true;
        if (!(ls >> r.next))
            fail("missing next state");
        unsigned l;
        while (ls >> l)
            r.labels.push_back(l);
        if (!ls.eof())
            fail("bad label");
        if (r.labels.empty())
            fail("branch without labels");
        rows.push_back(std::move(r));
    }
    if (rows.empty())
        throw std::invalid_argument("trellis text: no branches");

    unsigned max_state = 0;
    for (const auto& r : rows)
        max_state = std::max({max_state, r.state, r.next});
    const std::size_t nb = std::size_t{1} << input_width;
    std::vector<std::vector<std::optional<Branch>>> table(
        max_state + 1, std::vector<std::optional<Branch>>(nb));
    for (auto& r : rows) {
        auto& slot = table[r.state][r.input];
        if (slot)
            throw std::invalid_argument("trellis text: duplicate branch for state " +
                                        std::to_string(r.state));
        slot = Branch{r.next, std::move(r.labels)};
    }
    std::vector<std::vector<Branch>> edges(table.size());
    for (std::size_t s = 0; s < table.size(); ++s)
        for (std::size_t b = 0; b < nb; ++b) {
            if (!table[s][b])
                throw std::invalid_argument("trellis text: state " + std::to_string(s) +
                                            " is missing input " + std::to_string(b));
            edges[s].push_back(std::move(*table[s][b]));
        }
    return Trellis(std::move(edges));
}

inline Trellis parse_trellis(const std::string& text)
{
    std::istringstream in(text);
    return parse_trellis(in);
}

inline void write_trellis(std::ostream& out, const Trellis& t)
{
    out << "# state input next labels\n";
    for (unsigned s = 0; s < t.num_states(); ++s)
        for (unsigned b = 0; b < t.branches_per_state(); ++b) {
            out << s << ' ';
            if (t.branch_bits() == 0)
                out << '-';
            for (unsigned i = t.branch_bits(); i-- > 0;)
                out << ((b >> i) & 1u);
            const Branch& br = t.branch(s, b);
            out << ' ' << br.next_state;
            for (unsigned l : br.labels)
                out << ' ' << l;
            out << '\n';
        }
}

} // namespace tcnoma
