// tcnoma: trellis-coded NOMA link simulator and distance analysis.
//
//   tcnoma simulate    --preset fig8 --out fig8.csv
//   tcnoma power-sweep --preset fig9 --frames 500 --out fig9.csv
//   tcnoma freedist    --step 0.02 --out dfree.csv
//   tcnoma optimize    --budget 1

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tcnoma/experiment.hpp"

namespace {

struct Flags {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> kv;
};

// Every flag is recorded as a key=value override applied after the config file.
void add_common(CLI::App* cmd, Flags& f)
{
    auto record = [&f](const char* key) {
        return [&f, key](const std::string& v) { f.kv.emplace_back(key, v); };
    };
    cmd->add_option("--config", f.config_file, "key=value configuration file");
    cmd->add_option_function<std::string>("--preset", record("preset"), "fig7 | fig8 | fig9");
    cmd->add_option_function<std::string>("--scheme", record("scheme"),
                                          "comma-separated: TC-NOMA-joint, TC-NOMA-separate, "
                                          "TC-NOMA-joint-rotate, TCMA, UC-NOMA");
    cmd->add_option_function<std::string>("--p1", record("p1"), "User 1 power");
    cmd->add_option_function<std::string>("--p2", record("p2"), "User 2 power");
    cmd->add_option_function<std::string>("--rotation", record("rotation"),
                                          "User 1 constellation rotation (rad)");
    cmd->add_option_function<std::string>("--snr-db", record("snr_db"),
                                          "SNR list 'a,b,c' or range 'start:stop:step'");
    cmd->add_option_function<std::string>("--frames", record("frames"), "frames per SNR point");
    cmd->add_option_function<std::string>("--frame-len", record("frame_len"),
                                          "information steps per frame");
    cmd->add_option_function<std::string>("--seed", record("seed"), "master seed");
    cmd->add_option_function<std::string>("--workers", record("workers"), "worker threads (0: all)");
    cmd->add_option_function<std::string>("--out", record("out"), "output CSV path (default stdout)");
    cmd->add_option_function<std::string>("--trellis-file", record("trellis_file"),
                                          "plain-text trellis table");
    cmd->add_option_function<std::string>("--h1-sq", record("h1_sq"), "|h1|^2");
    cmd->add_option_function<std::string>("--h2-sq", record("h2_sq"), "|h2|^2");
    cmd->add_option_function<std::string>("--ratio-start", record("ratio_start"), "sweep start");
    cmd->add_option_function<std::string>("--ratio-stop", record("ratio_stop"), "sweep stop");
    cmd->add_option_function<std::string>("--ratio-step", record("ratio_step"), "sweep step");
    cmd->add_option_function<std::string>("--budget", record("budget"), "total power P");
    cmd->add_option_function<std::string>("--step", record("grid_step"), "ratio grid step");
    cmd->add_option_function<std::string>("--max-len", record("max_len"),
                                          "free-distance search depth");
}

tcnoma::ExperimentConfig resolve(const Flags& f, const std::string& command)
{
    tcnoma::ExperimentConfig c = tcnoma::defaults_for(command);
    std::vector<std::pair<std::string, std::string>> kv;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in)
            throw std::runtime_error("cannot open config file '" + f.config_file + "'");
        kv = tcnoma::parse_key_values(in);
    }
    // a preset flag replaces the file's preset; other flags override file keys
    for (const auto& [k, v] : f.kv)
        if (k == "preset")
            std::erase_if(kv, [](const auto& e) { return e.first == "preset"; });
    kv.insert(kv.end(), f.kv.begin(), f.kv.end());
    tcnoma::apply_key_values(c, kv);
    return c;
}

template <class Fn>
void with_output(const tcnoma::ExperimentConfig& c, Fn&& fn)
{
    if (c.out.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream file(c.out);
    if (!file)
        throw std::runtime_error("cannot write '" + c.out + "'");
    fn(file);
    if (!file)
        throw std::runtime_error("write failed for '" + c.out + "'");
    std::cerr << "wrote " << c.out << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Trellis-coded NOMA simulator"};
    app.require_subcommand(1);
    Flags f;
    auto* sim = app.add_subcommand("simulate", "BER vs SNR for the selected schemes");
    auto* sweep = app.add_subcommand("power-sweep", "BER vs P1/P2 with P1 + P2 = 1");
    auto* fd = app.add_subcommand("freedist", "closed-form vs search free distance table");
    auto* opt = app.add_subcommand("optimize", "optimal power allocation");
    for (auto* cmd : {sim, sweep, fd, opt})
        add_common(cmd, f);

    CLI11_PARSE(app, argc, argv);

    try {
        auto* cmd = app.get_subcommands().front();
        const tcnoma::ExperimentConfig c = resolve(f, cmd->get_name());
        if (cmd == sim)
            with_output(c, [&](std::ostream& o) { tcnoma::cmd_simulate(c, o, &std::cerr); });
        else if (cmd == sweep)
            with_output(c, [&](std::ostream& o) { tcnoma::cmd_power_sweep(c, o, &std::cerr); });
        else if (cmd == fd)
            with_output(c, [&](std::ostream& o) { tcnoma::cmd_freedist(c, o, std::cerr); });
        else if (cmd == opt)
            with_output(c, [&](std::ostream& o) { tcnoma::cmd_optimize(c, o); });
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
