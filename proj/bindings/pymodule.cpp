#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "lipband/config.hpp"

namespace py = pybind11;

namespace {

lipband::ExperimentConfig parsed(const std::string& text) {
    lipband::ExperimentConfig cfg = lipband::parse_config(text);
    const auto issues = lipband::validate_config(cfg);
    if (!issues.empty()) throw std::invalid_argument(issues.front());
    return cfg;
}

py::dict run_text(const std::string& config_text, std::uint64_t trial) {
    const lipband::ExperimentConfig cfg = parsed(config_text);
    const lipband::EnvModel env = lipband::make_env(cfg);
    const lipband::EpisodeResult res =
        lipband::run_episode(env, lipband::make_run_params(cfg, trial));
    py::dict d;
    d["algorithm"] = lipband::to_string(cfg.algorithm);
    d["horizon"] = res.trace.horizon;
    d["grid_k"] = res.grid_k;
    d["total_regret"] = res.total_regret;
    d["cum_regret"] = res.trace.cum_regret;
    d["good_held"] = res.good.held;
    d["players_consistent"] = res.players_consistent;
    d["miscoordination_rounds"] = res.miscoordination_rounds;
    d["signal_rounds"] = res.signal_rounds;
    d["active_arms"] = res.arms.size();
    return d;
}

} // namespace

PYBIND11_MODULE(_lipband, m) {
    m.doc() = "simulators for cooperative lipschitz bandits without communication";

    m.def("run", &run_text, py::arg("config_text"), py::arg("trial") = 0,
          "Run one episode of the configured experiment and return its summary.");

    m.def(
        "choose_grid_k",
        [](std::uint64_t horizon, double lipschitz, int players, int dim,
           const std::string& rule) {
            lipband::KRule r;
            if (rule == "ucb")
                r = lipband::KRule::UCB;
            else if (rule == "dsee")
                r = lipband::KRule::DSEE;
            else
                throw std::invalid_argument("rule must be 'ucb' or 'dsee'");
            return lipband::choose_grid_k(horizon, lipschitz, players, dim, r);
        },
        py::arg("horizon"), py::arg("lipschitz"), py::arg("players"), py::arg("dim"),
        py::arg("rule") = "ucb", "Grid resolution used by the sweep policies.");

    m.def(
        "canonical_config",
        [](const std::string& text) {
            return lipband::serialize_config(lipband::parse_config(text));
        },
        py::arg("config_text"), "Parse a config and return its canonical form.");

    m.def(
        "config_hash",
        [](const std::string& text) {
            return lipband::config_hash(lipband::parse_config(text));
        },
        py::arg("config_text"));

    m.def("algorithms", [] {
        return std::vector<std::string>{"mcab_a", "mcab_b", "mcab_c", "mzoom_a", "mzoom_b"};
    });
}
