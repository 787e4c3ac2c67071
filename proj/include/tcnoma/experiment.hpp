#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel_sim.hpp"
#include "powalloc.hpp"

namespace tcnoma {

namespace fmt_detail {
inline std::string num(double v, const char* spec = "%.10g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}
} // namespace fmt_detail

/// Parameters of one CLI invocation. Serialises to and parses from plain
/// `key=value` text; unknown keys are rejected.
struct ExperimentConfig {
    std::string preset;
    std::vector<Scheme> schemes{Scheme::TcJoint};
    double p1 = 0.1;
    double p2 = 1.0;
    std::optional<double> rotation; // default per scheme
    std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    double ratio_start = 0.05;
    double ratio_stop = 0.95;
    double ratio_step = 0.05;
    double h1_sq = 2.0;
    double h2_sq = 1.0;
    std::size_t frames = 2000;
    std::size_t frame_len = 500;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out;
    std::string trellis_file;
    double budget = 1.0;
    double grid_step = 0.001;
    std::size_t max_len = 12;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline std::vector<double> parse_number_list(const std::string& text)
{
    auto to_d = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size())
            throw std::invalid_argument("not a number: '" + s + "' in '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');)
            parts.push_back(p);
        if (parts.size() != 3)
            throw std::invalid_argument("range must be start:stop:step, got '" + text + "'");
        const double a = to_d(parts[0]), b = to_d(parts[1]), st = to_d(parts[2]);
        if (!(st > 0.0) || b < a)
            throw std::invalid_argument("range '" + text + "' needs step > 0 and stop >= start");
        const auto n = std::size_t(std::floor((b - a) / st + 1e-9));
        for (std::size_t k = 0; k <= n; ++k)
            out.push_back(std::round((a + double(k) * st) * 1e9) / 1e9);
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        p.erase(0, p.find_first_not_of(" \t"));
        p.erase(p.find_last_not_of(" \t") + 1);
        if (!p.empty())
            out.push_back(to_d(p));
    }
    return out;
}

inline std::vector<Scheme> parse_scheme_list(const std::string& text)
{
    std::vector<Scheme> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        p.erase(0, p.find_first_not_of(" \t"));
        p.erase(p.find_last_not_of(" \t") + 1);
        if (!p.empty())
            out.push_back(parse_scheme(p));
    }
    return out;
}

/// Defaults before any preset, file or flag: power-sweep runs at 16 and
/// 18 dB, freedist tabulates on a 0.02 ratio grid.
inline ExperimentConfig defaults_for(const std::string& command)
{
    ExperimentConfig c;
    if (command == "power-sweep")
        c.snr_db = {16.0, 18.0};
    else if (command == "freedist")
        c.grid_step = 0.02;
    return c;
}

/// Loads one of the figure presets into `c`.
inline void apply_preset(ExperimentConfig& c, const std::string& name)
{
    if (name.empty())
        return;
    if (name == "fig7" || name == "fig8") {
        c.schemes = {Scheme::TcJoint, Scheme::TcSeparate, Scheme::Tcma, Scheme::UcNoma};
        if (name == "fig8")
            c.schemes.insert(c.schemes.begin() + 1, Scheme::TcJointRotate);
        c.p1 = name == "fig7" ? 0.1 : 0.3;
        c.p2 = 1.0;
        c.snr_db = parse_number_list("0:20:2");
    } else if (name == "fig9") {
        c.schemes = {Scheme::TcJoint, Scheme::UcNoma, Scheme::Tcma};
        c.snr_db = {16.0, 18.0};
        c.ratio_start = 0.05;
        c.ratio_stop = 0.95;
        c.ratio_step = 0.05;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (expected fig7, fig8 or fig9)");
    }
    c.h1_sq = 2.0;
    c.h2_sq = 1.0;
    c.preset = name;
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value)
{
    auto as_double = [&] {
        const auto v = parse_number_list(value);
        if (v.size() != 1)
            throw std::invalid_argument(key + ": expected one number, got '" + value + "'");
        return v.front();
    };
    auto as_count = [&] {
        const double v = as_double();
        if (v < 0 || v != std::floor(v))
            throw std::invalid_argument(key + ": expected a non-negative integer, got '" + value + "'");
        return std::uint64_t(v);
    };
    if (key == "preset") apply_preset(c, value);
    else if (key == "scheme") c.schemes = parse_scheme_list(value);
    else if (key == "p1") c.p1 = as_double();
    else if (key == "p2") c.p2 = as_double();
    else if (key == "rotation") c.rotation = value.empty() ? std::nullopt : std::optional(as_double());
    else if (key == "snr_db") c.snr_db = parse_number_list(value);
    else if (key == "ratio_start") c.ratio_start = as_double();
    else if (key == "ratio_stop") c.ratio_stop = as_double();
    else if (key == "ratio_step") c.ratio_step = as_double();
    else if (key == "h1_sq") c.h1_sq = as_double();
    else if (key == "h2_sq") c.h2_sq = as_double();
    else if (key == "frames") c.frames = as_count();
    else if (key == "frame_len") c.frame_len = as_count();
    else if (key == "seed") c.seed = as_count();
    else if (key == "workers") c.workers = unsigned(as_count());
    else if (key == "out") c.out = value;
    else if (key == "trellis_file") c.trellis_file = value;
    else if (key == "budget") c.budget = as_double();
    else if (key == "grid_step") c.grid_step = as_double();
    else if (key == "max_len") c.max_len = as_count();
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

/// `key=value` lines; '#' comments and blank lines are ignored. A preset
/// key is applied first so explicit keys override it.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in)
{
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        k.erase(k.find_last_not_of(" \t") + 1);
        v.erase(0, v.find_first_not_of(" \t"));
        kv.emplace_back(k, v);
    }
    return kv;
}

inline void apply_key_values(ExperimentConfig& c,
                             const std::vector<std::pair<std::string, std::string>>& kv)
{
    for (const auto& [k, v] : kv)
        if (k == "preset")
            set_config_value(c, k, v);
    for (const auto& [k, v] : kv)
        if (k != "preset")
            set_config_value(c, k, v);
}

inline ExperimentConfig parse_config(const std::string& text)
{
    std::istringstream in(text);
    ExperimentConfig c;
    apply_key_values(c, parse_key_values(in));
    return c;
}

inline std::string serialize_config(const ExperimentConfig& c)
{
    using fmt_detail::num;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + num(v[i], "%.17g");
        return s;
    };
    std::ostringstream o;
    if (!c.preset.empty())
        o << "preset=" << c.preset << '\n';
    o << "scheme=";
    for (std::size_t i = 0; i < c.schemes.size(); ++i)
        o << (i ? "," : "") << scheme_name(c.schemes[i]);
    o << '\n';
    o << "p1=" << num(c.p1, "%.17g") << '\n' << "p2=" << num(c.p2, "%.17g") << '\n';
    if (c.rotation)
        o << "rotation=" << num(*c.rotation, "%.17g") << '\n';
    o << "snr_db=" << list(c.snr_db) << '\n';
    o << "ratio_start=" << num(c.ratio_start, "%.17g") << '\n'
      << "ratio_stop=" << num(c.ratio_stop, "%.17g") << '\n'
      << "ratio_step=" << num(c.ratio_step, "%.17g") << '\n'
      << "h1_sq=" << num(c.h1_sq, "%.17g") << '\n'
      << "h2_sq=" << num(c.h2_sq, "%.17g") << '\n'
      << "frames=" << c.frames << '\n'
      << "frame_len=" << c.frame_len << '\n'
      << "seed=" << c.seed << '\n'
      << "workers=" << c.workers << '\n'
      << "out=" << c.out << '\n'
      << "trellis_file=" << c.trellis_file << '\n'
      << "budget=" << num(c.budget, "%.17g") << '\n'
      << "grid_step=" << num(c.grid_step, "%.17g") << '\n'
      << "max_len=" << c.max_len << '\n';
    return o.str();
}

inline std::shared_ptr<const Trellis> load_trellis_file(const std::string& path)
{
    if (path.empty())
        return nullptr;
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trellis file '" + path + "'");
    return std::make_shared<const Trellis>(parse_trellis(in));
}

inline ChannelParams channel_from(const ExperimentConfig& c)
{
    if (!(c.h1_sq > 0.0) || !(c.h2_sq > 0.0))
        throw std::invalid_argument("channel power gains must be positive");
    ChannelParams ch{{std::sqrt(c.h1_sq), 0.0}, {std::sqrt(c.h2_sq), 0.0}, 1.0};
    ch.validate();
    return ch;
}

inline SimOptions sim_options_from(const ExperimentConfig& c)
{
    return {c.frames, c.frame_len, c.seed, c.workers};
}

inline SchemeConfig scheme_from(const ExperimentConfig& c, Scheme s, PowerPair pw,
                                const std::shared_ptr<const Trellis>& trellis)
{
    SchemeConfig sc = SchemeConfig::make(s, pw);
    if (c.rotation && (s == Scheme::TcJointRotate || s == Scheme::Tcma))
        sc.rotation = *c.rotation;
    if (s != Scheme::UcNoma) {
        sc.trellis1 = trellis;
        sc.trellis2 = trellis;
    }
    sc.validate();
    return sc;
}

inline void validate_common(const ExperimentConfig& c)
{
    if (c.schemes.empty())
        throw std::invalid_argument("no scheme selected (use --scheme or --preset)");
    if (c.snr_db.empty())
        throw std::invalid_argument("empty SNR list (use --snr-db, e.g. 0:20:2)");
    if (c.frames == 0 || c.frame_len == 0)
        throw std::invalid_argument("--frames and --frame-len must be at least 1");
}

inline constexpr const char* ber_csv_header =
    "scheme,snr_db,p1,p2,ber_user1,ber_user2,ber_avg,frames,seed";

inline void write_ber_csv_row(std::ostream& o, const BERRecord& r)
{
    using fmt_detail::num;
    o << scheme_name(r.scheme) << ',' << num(r.snr_db, "%g") << ',' << num(r.powers.p1) << ','
      << num(r.powers.p2) << ',' << num(r.ber_user1, "%.6e") << ',' << num(r.ber_user2, "%.6e")
      << ',' << num(r.ber_avg, "%.6e") << ',' << r.frames << ',' << r.seed << '\n';
}

inline void write_ber_csv(std::ostream& o, const std::vector<BERRecord>& recs)
{
    o << ber_csv_header << '\n';
    for (const auto& r : recs)
        write_ber_csv_row(o, r);
}

/// BER vs SNR for every configured scheme.
inline std::vector<BERRecord> cmd_simulate(const ExperimentConfig& c, std::ostream& csv,
                                           std::ostream* log = nullptr)
{
    validate_common(c);
    const auto trellis = load_trellis_file(c.trellis_file);
    const ChannelParams ch = channel_from(c);
    const PowerPair pw(c.p1, c.p2);
    std::vector<BERRecord> all;
    for (Scheme s : c.schemes) {
        const auto recs = run_ber(scheme_from(c, s, pw, trellis), ch, c.snr_db, sim_options_from(c));
        all.insert(all.end(), recs.begin(), recs.end());
        if (log)
            for (const auto& r : recs)
                *log << scheme_name(s) << "  snr=" << fmt_detail::num(r.snr_db, "%5.1f")
                     << " dB  ber1=" << fmt_detail::num(r.ber_user1, "%.3e")
                     << "  ber2=" << fmt_detail::num(r.ber_user2, "%.3e")
                     << "  avg=" << fmt_detail::num(r.ber_avg, "%.3e") << '\n';
    }
    write_ber_csv(csv, all);
    return all;
}

inline std::vector<double> sweep_ratios(const ExperimentConfig& c)
{
    if (!(c.ratio_start > 0.0) || !(c.ratio_stop < 1.0) || c.ratio_stop < c.ratio_start ||
        !(c.ratio_step > 0.0))
        throw std::invalid_argument("ratio sweep needs 0 < start <= stop < 1 and step > 0");
    std::ostringstream r;
    r << fmt_detail::num(c.ratio_start, "%.17g") << ':' << fmt_detail::num(c.ratio_stop, "%.17g")
      << ':' << fmt_detail::num(c.ratio_step, "%.17g");
    return parse_number_list(r.str());
}

/// BER vs P1/P2 with P1 + P2 = 1 for every configured scheme.
inline std::vector<BERRecord> cmd_power_sweep(const ExperimentConfig& c, std::ostream& csv,
                                              std::ostream* log = nullptr)
{
    validate_common(c);
    const auto trellis = load_trellis_file(c.trellis_file);
    const ChannelParams ch = channel_from(c);
    std::vector<BERRecord> all;
    for (Scheme s : c.schemes)
        for (double r : sweep_ratios(c)) {
            const auto recs = run_ber(scheme_from(c, s, PowerPair::from_ratio(r), trellis), ch,
                                      c.snr_db, sim_options_from(c));
            all.insert(all.end(), recs.begin(), recs.end());
            if (log)
                for (const auto& rec : recs)
                    *log << scheme_name(s) << "  ratio=" << fmt_detail::num(r, "%.3f")
                         << "  snr=" << fmt_detail::num(rec.snr_db, "%g")
                         << " dB  avg=" << fmt_detail::num(rec.ber_avg, "%.3e") << '\n';
        }
    write_ber_csv(csv, all);
    return all;
}

struct FreeDistRow {
    double ratio;
    DistanceReport closed;
    double search_d_free_sq;
};

inline constexpr const char* freedist_csv_header =
    "ratio,d_parallel_sq,d_dm_sq,d_free_sq,search_d_free_sq";

/// Closed form vs search oracle over ratios grid_step, 2*grid_step, ..., 1
/// at P1 + P2 = budget. The report lists the argmax of each column and
/// every ratio where the two disagree.
inline std::vector<FreeDistRow> cmd_freedist(const ExperimentConfig& c, std::ostream& csv,
                                             std::ostream& report)
{
    using fmt_detail::num;
    const auto trellis = load_trellis_file(c.trellis_file);
    const Trellis t = trellis ? *trellis : build_ungerboeck_4state();
    const Constellation psk8 = make_8psk();
    std::vector<double> ratios = ratio_grid(c.grid_step);
    ratios.push_back(1.0);

    std::vector<FreeDistRow> rows;
    csv << freedist_csv_header << '\n';
    for (double r : ratios) {
        const PowerPair pw = PowerPair::from_ratio(r, c.budget);
        const auto rep = d_free_search(tensor_product(t, t, pw, psk8, psk8), c.max_len);
        rows.push_back({r, d_free_sq(pw), rep.d_free_sq().value_or(-1.0)});
        const auto& row = rows.back();
        csv << num(r, "%.6g") << ',' << num(row.closed.d_parallel_sq) << ','
            << num(row.closed.d_dm_sq) << ',' << num(row.closed.d_free_sq) << ','
            << num(row.search_d_free_sq) << '\n';
    }

    auto argmax = [&](auto get) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (get(rows[i]) > get(rows[best]))
                best = i;
        return rows[best];
    };
    const auto cf = argmax([](const FreeDistRow& r) { return r.closed.d_free_sq; });
    const auto so = argmax([](const FreeDistRow& r) { return r.search_d_free_sq; });
    report << "closed-form argmax: ratio " << num(cf.ratio, "%.4f") << "  d_free_sq "
           << num(cf.closed.d_free_sq, "%.6f") << '\n';
    report << "search argmax:      ratio " << num(so.ratio, "%.4f") << "  d_free_sq "
           << num(so.search_d_free_sq, "%.6f") << '\n';
    std::size_t above = 0, below = 0;
    for (const auto& r : rows) {
        const double diff = r.search_d_free_sq - r.closed.d_free_sq;
        if (diff > 1e-9) {
            ++above;
            report << "  search exceeds closed form at ratio " << num(r.ratio, "%.4f") << " by "
                   << num(diff, "%.3e") << '\n';
        } else if (diff < -1e-9) {
            ++below;
        }
    }
    report << "ratios where search < closed form: " << below << " of " << rows.size() << '\n';
    report << "ratios where search > closed form: " << above << " of " << rows.size() << '\n';
    return rows;
}

/// Closed-form and grid optimum side by side.
inline std::pair<PowerSolution, PowerSolution> cmd_optimize(const ExperimentConfig& c,
                                                            std::ostream& out)
{
    using fmt_detail::num;
    const PowerSolution cf = optimal_powers_closed_form(c.budget);
    const PowerSolution grid = optimal_powers_grid(c.budget, c.grid_step, Evaluator::ClosedForm);
    out << "method,budget,p1,p2,ratio,d_free_sq\n";
    for (auto [name, s] : {std::pair{"closed-form", cf}, std::pair{"grid", grid}})
        out << name << ',' << num(c.budget) << ',' << num(s.p1_star, "%.6f") << ','
            << num(s.p2_star, "%.6f") << ',' << num(s.ratio, "%.6f") << ','
            << num(s.d_free_sq_at_opt, "%.6f") << '\n';
    return {cf, grid};
}

} // namespace tcnoma
