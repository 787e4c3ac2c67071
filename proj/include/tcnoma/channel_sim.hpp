#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "detectors.hpp"

namespace tcnoma {

enum class Scheme { TcJoint, TcSeparate, TcJointRotate, Tcma, UcNoma };

inline constexpr std::array<Scheme, 5> all_schemes{Scheme::TcJoint, Scheme::TcSeparate,
                                                   Scheme::TcJointRotate, Scheme::Tcma,
                                                   Scheme::UcNoma};

inline std::string_view scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::TcJoint: return "TC-NOMA-joint";
    case Scheme::TcSeparate: return "TC-NOMA-separate";
    case Scheme::TcJointRotate: return "TC-NOMA-joint-rotate";
    case Scheme::Tcma: return "TCMA";
    case Scheme::UcNoma: return "UC-NOMA";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name)
{
    for (Scheme s : all_schemes)
        if (scheme_name(s) == name)
            return s;
    throw std::invalid_argument("unknown scheme '" + std::string(name) +
                                "' (expected TC-NOMA-joint, TC-NOMA-separate, "
                                "TC-NOMA-joint-rotate, TCMA or UC-NOMA)");
}

inline constexpr double default_rotation = std::numbers::pi / 8.0;

struct SchemeConfig {
    Scheme scheme = Scheme::TcJoint;
    PowerPair powers{0.1, 1.0};
    double rotation = 0.0; // applied to User 1's constellation
    std::shared_ptr<const Trellis> trellis1;
    std::shared_ptr<const Trellis> trellis2;

    /// Config with the scheme's default rotation (pi/8 for the rotate and
    /// TCMA variants, 0 otherwise).
    static SchemeConfig make(Scheme s, PowerPair pw)
    {
        SchemeConfig c;
        c.scheme = s;
        c.powers = pw;
        c.rotation = (s == Scheme::TcJointRotate || s == Scheme::Tcma) ? default_rotation : 0.0;
        return c;
    }

    void validate() const
    {
        const bool rotating = scheme == Scheme::TcJointRotate || scheme == Scheme::Tcma;
        if (!rotating && rotation != 0.0)
            throw std::invalid_argument(std::string(scheme_name(scheme)) +
                                        " does not take a constellation rotation");
        if (scheme == Scheme::UcNoma && (trellis1 || trellis2))
            throw std::invalid_argument("UC-NOMA does not use a trellis");
        if (scheme == Scheme::Tcma) {
            if (!(powers.total() > 0.0))
                throw std::invalid_argument("TCMA: total power must be positive");
        } else {
            powers.require_ordered();
        }
    }

    const Trellis& first_trellis() const { return trellis1 ? *trellis1 : default_trellis(); }
    const Trellis& second_trellis() const { return trellis2 ? *trellis2 : default_trellis(); }

private:
    static const Trellis& default_trellis()
    {
        static const Trellis t = build_ungerboeck_4state();
        return t;
    }
};

struct ChannelParams {
    cplx h1{std::sqrt(2.0), 0.0};
    cplx h2{1.0, 0.0};
    double sigma2 = 1.0;

    void validate() const
    {
        if (!(std::norm(h1) > std::norm(h2)))
            throw std::invalid_argument("channel: require |h1|^2 > |h2|^2");
        if (!(sigma2 > 0.0))
            throw std::invalid_argument("channel: noise variance must be positive");
    }

    cplx gain(int user) const { return user == 1 ? h1 : h2; }

    static double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }
};

struct BERRecord {
    Scheme scheme = Scheme::TcJoint;
    double snr_db = 0.0;
    PowerPair powers;
    double ber_user1 = 0.0;
    double ber_user2 = 0.0;
    double ber_avg = 0.0; // pooled: (errors1 + errors2) / (bits1 + bits2)
    std::uint64_t frames = 0;
    std::uint64_t info_bits_counted = 0; // per user
    std::uint64_t errors_user1 = 0;
    std::uint64_t errors_user2 = 0;
    std::uint64_t seed = 0;
};

/// sqrt(P1)*a1(n) + sqrt(P2)*a2(n)
inline std::vector<cplx> transmit(std::span<const cplx> a1, std::span<const cplx> a2,
                                  const PowerPair& pw)
{
    if (a1.size() != a2.size())
        throw std::invalid_argument("transmit: symbol streams differ in length");
    const double s1 = std::sqrt(pw.p1), s2 = std::sqrt(pw.p2);
    std::vector<cplx> x(a1.size());
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = s1 * a1[n] + s2 * a2[n];
    return x;
}

/// sqrt((P1 + P2)/2) * (a1(n) + a2(n))
inline std::vector<cplx> transmit_tcma(std::span<const cplx> a1, std::span<const cplx> a2,
                                       const PowerPair& pw)
{
    if (a1.size() != a2.size())
        throw std::invalid_argument("transmit_tcma: symbol streams differ in length");
    const double s = std::sqrt(pw.total() / 2.0);
    std::vector<cplx> x(a1.size());
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = s * (a1[n] + a2[n]);
    return x;
}

/// y(n) = h_user x(n) + w(n), w ~ CN(0, sigma2) with sigma2/2 per component.
template <class Rng>
ReceivedFrame apply_channel(std::span<const cplx> x, const ChannelParams& ch, int user, Rng& rng)
{
    if (user != 1 && user != 2)
        throw std::invalid_argument("apply_channel: user must be 1 or 2");
    std::normal_distribution<double> gauss(0.0, std::sqrt(ch.sigma2 / 2.0));
    ReceivedFrame rx;
    rx.channel_gain = ch.gain(user);
    rx.noise_var = ch.sigma2;
    rx.samples.resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        rx.samples[n] = rx.channel_gain * x[n] + cplx(re, im);
    }
    return rx;
}

/// Independent generator for (seed, frame, purpose). Streams depend only on
/// these values, never on the worker that consumes them.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t frame, std::uint32_t purpose)
{
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(frame),
                      std::uint32_t(frame >> 32), purpose};
    return std::mt19937_64(seq);
}

inline Bits random_bits(std::size_t count, std::mt19937_64& rng)
{
    Bits b(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0)
            word = rng();
        b[i] = std::uint8_t((word >> (i % 64)) & 1u);
    }
    return b;
}

struct SimOptions {
    std::size_t frames = 2000;
    std::size_t frame_len = 500; // information steps (symbols for UC-NOMA)
    std::uint64_t seed = 1;
    unsigned workers = 0;        // 0: hardware concurrency
};

/// Immutable per-scheme link: codes, product trellis, constellations.
class Link {
public:
    explicit Link(const SchemeConfig& cfg) : cfg_(cfg)
    {
        cfg_.validate();
        if (cfg_.scheme == Scheme::UcNoma) {
            q1_ = std::make_unique<Constellation>(make_qpsk_gray());
            q2_ = std::make_unique<Constellation>(make_qpsk_gray());
            return;
        }
        const Trellis& t1 = cfg_.first_trellis();
        const Trellis& t2 = cfg_.second_trellis();
        const std::size_t tail = std::max(t1.tail_length(), t2.tail_length());
        code1_ = std::make_unique<TcmCode>(t1, make_8psk(cfg_.rotation), tail);
        code2_ = std::make_unique<TcmCode>(t2, make_8psk(), tail);
        const PowerPair det_powers = cfg_.scheme == Scheme::Tcma
                                         ? PowerPair(cfg_.powers.total() / 2, cfg_.powers.total() / 2)
                                         : cfg_.powers;
        product_ = std::make_unique<ProductTrellis>(t1, t2, det_powers, code1_->constellation,
                                                    code2_->constellation);
    }

    const SchemeConfig& config() const { return cfg_; }

    std::size_t bits_per_frame(int user, std::size_t frame_len) const
    {
        if (cfg_.scheme == Scheme::UcNoma)
            return frame_len * 2;
        return frame_len * (user == 1 ? code1_->trellis : code2_->trellis).bits_per_step();
    }

    /// Errors of both users for one frame at each SNR point.
    void run_frame(std::uint64_t seed, std::uint64_t frame, std::size_t frame_len,
                   const ChannelParams& base, std::span<const double> snr_db,
                   std::span<std::uint64_t> err1, std::span<std::uint64_t> err2) const
    {
        auto rb1 = stream_rng(seed, frame, 0);
        auto rb2 = stream_rng(seed, frame, 1);
        const Bits bits1 = random_bits(bits_per_frame(1, frame_len), rb1);
        const Bits bits2 = random_bits(bits_per_frame(2, frame_len), rb2);

        std::vector<cplx> x;
        if (cfg_.scheme == Scheme::UcNoma) {
            const auto s1 = map_uncoded(bits1, *q1_), s2 = map_uncoded(bits2, *q2_);
            x = transmit(s1, s2, cfg_.powers);
        } else {
            const Codeword c1 = code1_->encode(InfoFrame(bits1, frame_len));
            const Codeword c2 = code2_->encode(InfoFrame(bits2, frame_len));
            x = cfg_.scheme == Scheme::Tcma ? transmit_tcma(c1.symbols, c2.symbols, cfg_.powers)
                                            : transmit(c1.symbols, c2.symbols, cfg_.powers);
        }

        for (std::size_t i = 0; i < snr_db.size(); ++i) {
            ChannelParams ch = base;
            ch.sigma2 = ChannelParams::sigma2_from_snr_db(snr_db[i]);
            auto rn1 = stream_rng(seed, frame, 2);
            auto rn2 = stream_rng(seed, frame, 3);
            const ReceivedFrame y1 = apply_channel(x, ch, 1, rn1);
            const ReceivedFrame y2 = apply_channel(x, ch, 2, rn2);
            const auto [u1, u2] = detect(y1, y2);
            err1[i] += count_errors(bits1, u1);
            err2[i] += count_errors(bits2, u2);
        }
    }

    /// Each user's own decoded bits (User 1 from y1, User 2 from y2).
    std::pair<Bits, Bits> detect(const ReceivedFrame& y1, const ReceivedFrame& y2) const
    {
        switch (cfg_.scheme) {
        case Scheme::TcJoint:
        case Scheme::TcJointRotate:
        case Scheme::Tcma:
            return {joint_detect(*product_, y1).bits_user1, joint_detect(*product_, y2).bits_user2};
        case Scheme::TcSeparate:
            return {sic_detect_user1(*code1_, *code2_, y1, cfg_.powers).bits_user1,
                    detect_user2_direct(*code2_, y2, cfg_.powers).bits_user2};
        case Scheme::UcNoma:
            return {uncoded_ml_detect(y1, cfg_.powers, *q1_, *q2_).bits_user1,
                    uncoded_ml_detect(y2, cfg_.powers, *q1_, *q2_).bits_user2};
        }
        throw std::logic_error("unhandled scheme");
    }

    static std::vector<cplx> map_uncoded(const Bits& bits, const Constellation& c)
    {
        const unsigned w = unsigned(std::countr_zero(c.size()));
        std::vector<cplx> s(bits.size() / w);
        for (std::size_t n = 0; n < s.size(); ++n) {
            unsigned idx = 0;
            for (unsigned i = 0; i < w; ++i)
                idx = (idx << 1) | bits[n * w + i];
            s[n] = c[idx];
        }
        return s;
    }

    static std::uint64_t count_errors(const Bits& ref, const Bits& got)
    {
        if (ref.size() != got.size())
            throw std::logic_error("decoded bit count mismatch");
        std::uint64_t e = 0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            e += (ref[i] != got[i]);
        return e;
    }

private:
    SchemeConfig cfg_;
    std::unique_ptr<TcmCode> code1_, code2_;
    std::unique_ptr<ProductTrellis> product_;
    std::unique_ptr<Constellation> q1_, q2_;
};

/// Monte-Carlo BER at each SNR. Frames are split across workers; each frame
/// draws from its own (seed, frame) streams and the same noise realisation
/// is reused across SNR points, so results do not depend on `workers`.
inline std::vector<BERRecord> run_ber(const SchemeConfig& scheme, const ChannelParams& channel,
                                      std::span<const double> snr_db, const SimOptions& opt)
{
    if (opt.frames == 0 || opt.frame_len == 0)
        throw std::invalid_argument("run_ber: frames and frame length must be at least 1");
    if (snr_db.empty())
        throw std::invalid_argument("run_ber: empty SNR list");
    {
        ChannelParams probe = channel;
        probe.sigma2 = 1.0;
        probe.validate();
    }
    const Link link(scheme);
    const std::size_t npts = snr_db.size();

    unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = unsigned(std::min<std::size_t>(workers, opt.frames));
    std::vector<std::vector<std::uint64_t>> e1(workers, std::vector<std::uint64_t>(npts, 0));
    std::vector<std::vector<std::uint64_t>> e2(workers, std::vector<std::uint64_t>(npts, 0));
    auto job = [&](unsigned w) {
        const std::size_t lo = opt.frames * w / workers, hi = opt.frames * (w + 1) / workers;
        for (std::size_t f = lo; f < hi; ++f)
            link.run_frame(opt.seed, f, opt.frame_len, channel, snr_db, e1[w], e2[w]);
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(job, w);
    }

    const std::uint64_t bits1 = link.bits_per_frame(1, opt.frame_len) * opt.frames;
    const std::uint64_t bits2 = link.bits_per_frame(2, opt.frame_len) * opt.frames;
    std::vector<BERRecord> out;
    for (std::size_t i = 0; i < npts; ++i) {
        BERRecord r;
        r.scheme = scheme.scheme;
        r.snr_db = snr_db[i];
        r.powers = scheme.powers;
        for (unsigned w = 0; w < workers; ++w) {
            r.errors_user1 += e1[w][i];
            r.errors_user2 += e2[w][i];
        }
        r.frames = opt.frames;
        r.info_bits_counted = bits1;
        r.ber_user1 = double(r.errors_user1) / double(bits1);
        r.ber_user2 = double(r.errors_user2) / double(bits2);
        r.ber_avg = double(r.errors_user1 + r.errors_user2) / double(bits1 + bits2);
        r.seed = opt.seed;
        out.push_back(r);
    }
    return out;
}

/// One-sided binomial standard deviation of a BER estimate.
inline double ber_sigma(double ber, std::uint64_t bits)
{
    if (bits == 0)
        return 0.0;
    return std::sqrt(std::max(ber * (1.0 - ber), 0.0) / double(bits));
}

} // namespace tcnoma
