#include "lrcs/report.hpp"

namespace lrcs {

namespace {

nlohmann::json opt(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["solver"] = meta.solver;
    j["meta"] = {{"n", meta.n},         {"q", meta.q},   {"r", meta.r},
                 {"m", meta.m},         {"sigma_v", meta.sigma_v},
                 {"seed", meta.seed},   {"mu", opt(meta.mu)},
                 {"kappa", opt(meta.kappa)}, {"nsr", opt(meta.nsr)}};
    j["init"] = {{"alpha", alpha},
                 {"truncation_fraction", truncation_fraction},
                 {"degenerate", init_degenerate},
                 {"sd2", opt(init_sd2)}};
    if (final_error) {
        j["final"] = {{"sd2", final_error->sd2},
                      {"frob_rel", final_error->frob_rel},
                      {"frob_abs", final_error->frob_abs}};
    } else {
        j["final"] = nullptr;
    }
    j["iterations"] = iterations;
    j["eta_halvings"] = eta_halvings;
    j["stop_reason"] = stop_reason;
    j["status"] = status;
    if (!message.empty()) j["message"] = message;
    j["timing_ms"] = {{"init", init_ms}, {"total", total_ms}};

    auto hist = nlohmann::json::array();
    for (const auto& rec : history) {
        hist.push_back({{"iter", rec.iter},
                        {"sd2", opt(rec.sd2_to_truth)},
                        {"frob_rel", opt(rec.frob_rel_err)},
                        {"grad_norm", rec.grad_norm},
                        {"eta", rec.eta_used},
                        {"objective", rec.objective},
                        {"b_step_ms", rec.b_step_ms},
                        {"u_step_ms", rec.u_step_ms},
                        {"wall_ms", rec.wall_ms}});
    }
    j["history"] = std::move(hist);
    return j;
}

}  // namespace lrcs
