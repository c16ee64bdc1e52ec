#include "lrcs/model.hpp"

#include "lrcs/errors.hpp"
#include "lrcs/linalg.hpp"
#include "lrcs/rng.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

namespace lrcs {

namespace {

constexpr double kOrthoTol = 1e-10;

MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) out(i, j) = normal(gen);
    }
    return out;
}

std::string bin_name(const char* stem, Index k) {
    return std::string(stem) + "_" + std::to_string(k) + ".bin";
}

void write_f64(const std::filesystem::path& path, const double* data, Index count) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (Index i = 0; i < count; ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(data[i]);
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffU);
        out.write(bytes, 8);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void read_f64(const std::filesystem::path& path, double* data, Index count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const auto size = std::filesystem::file_size(path);
    if (size != static_cast<std::uintmax_t>(count) * 8U) {
        throw std::runtime_error(path.string() + ": expected " + std::to_string(count * 8) +
                                 " bytes, found " + std::to_string(size));
    }
    for (Index i = 0; i < count; ++i) {
        unsigned char bytes[8];
        in.read(reinterpret_cast<char*>(bytes), 8);
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        data[i] = std::bit_cast<double>(bits);
    }
    if (!in) throw std::runtime_error("read failed: " + path.string());
}

}  // namespace

GroundTruth GroundTruth::from_factors(MatrixXd u_star, VectorXd sigma_star, MatrixXd v_star) {
    const Index r = sigma_star.size();
    if (r == 0) throw ConfigError("ground truth: rank must be at least 1");
    if (u_star.cols() != r || v_star.cols() != r) {
        throw ConfigError("ground truth: factor column counts disagree with rank");
    }
    if (r > std::min(u_star.rows(), v_star.rows())) {
        throw ConfigError("ground truth: r > min(n, q)");
    }
    if (linalg::orthonormality_error(u_star) > kOrthoTol ||
        linalg::orthonormality_error(v_star) > kOrthoTol) {
        throw ConfigError("ground truth: factors are not orthonormal");
    }
    for (Index i = 0; i < r; ++i) {
        if (!(sigma_star(i) > 0.0) || !std::isfinite(sigma_star(i))) {
            throw ConfigError("ground truth: singular values must be positive and finite");
        }
        if (i > 0 && sigma_star(i) > sigma_star(i - 1)) {
            throw ConfigError("ground truth: singular values must be nonincreasing");
        }
    }
    GroundTruth gt;
    gt.b_star_ = sigma_star.asDiagonal() * v_star.transpose();
    gt.x_star_ = u_star * gt.b_star_;
    gt.u_star_ = std::move(u_star);
    gt.sigma_star_ = std::move(sigma_star);
    gt.v_star_ = std::move(v_star);
    return gt;
}

void ProblemInstance::validate() const {
    if (matrices.size() != observations.size()) {
        throw ConfigError("instance: matrix and observation counts differ");
    }
    if (matrices.empty()) throw ConfigError("instance: no columns");
    if (m < 1) throw ConfigError("instance: m must be at least 1");
    if (!(sigma_v >= 0.0)) throw ConfigError("instance: sigma_v must be nonnegative");
    const Index cols = n();
    for (std::size_t k = 0; k < matrices.size(); ++k) {
        if (matrices[k].rows() != m || matrices[k].cols() != cols) {
            throw ConfigError("instance: A_" + std::to_string(k) + " has the wrong shape");
        }
        if (observations[k].size() != m) {
            throw ConfigError("instance: y_" + std::to_string(k) + " has the wrong length");
        }
    }
    if (truth && (truth->n() != cols || truth->q() != q())) {
        throw ConfigError("instance: ground truth dimensions disagree with measurements");
    }
}

GroundTruth generate_ground_truth(Index n, Index q, Index r, double kappa_target,
                                  std::uint64_t seed) {
    if (n < 1 || q < 1 || r < 1) throw ConfigError("generate_ground_truth: sizes must be positive");
    if (r > std::min(n, q)) throw ConfigError("generate_ground_truth: r > min(n, q)");
    if (!(kappa_target >= 1.0) || !std::isfinite(kappa_target)) {
        throw ConfigError("generate_ground_truth: kappa_target must be >= 1");
    }
    if (r == 1 && kappa_target != 1.0) {
        throw ConfigError("generate_ground_truth: rank 1 admits only kappa_target = 1");
    }

    auto left_gen = make_stream(seed, StreamTag::kLeftFactor);
    auto right_gen = make_stream(seed, StreamTag::kRightFactor);
    MatrixXd u = linalg::thin_q(gaussian_matrix(n, r, left_gen));
    MatrixXd v = linalg::thin_q(gaussian_matrix(q, r, right_gen));

    VectorXd sigma(r);
    const double log_kappa = std::log(kappa_target);
    for (Index i = 0; i < r; ++i) {
        const double frac = r == 1 ? 0.0 : static_cast<double>(r - 1 - i) / static_cast<double>(r - 1);
        sigma(i) = std::exp(frac * log_kappa);
    }
    sigma(0) = kappa_target;
    sigma(r - 1) = 1.0;
    return GroundTruth::from_factors(std::move(u), std::move(sigma), std::move(v));
}

ColumnMeasurement measure_column(const GroundTruth& truth, Index k, Index m, double sigma_v,
                                 std::uint64_t seed) {
    if (k < 0 || k >= truth.q()) throw ConfigError("measure_column: column index out of range");
    const Index n = truth.n();
    auto sensing = make_stream(seed, StreamTag::kSensing, static_cast<std::uint64_t>(k));
    auto noise_gen = make_stream(seed, StreamTag::kNoise, static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::normal_distribution<double> noise_normal(0.0, 1.0);

    ColumnMeasurement col;
    col.a.resize(m, n);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) col.a(i, j) = normal(sensing);
    }
    col.y = col.a * truth.x_star().col(k);
    if (sigma_v > 0.0) {
        for (Index i = 0; i < m; ++i) col.y(i) += sigma_v * noise_normal(noise_gen);
    }
    return col;
}

ProblemInstance measure(const GroundTruth& truth, Index m, double sigma_v, std::uint64_t seed) {
    if (m < 1) throw ConfigError("measure: m must be at least 1");
    if (!(sigma_v >= 0.0) || !std::isfinite(sigma_v)) {
        throw ConfigError("measure: sigma_v must be finite and nonnegative");
    }
    ProblemInstance inst;
    inst.m = m;
    inst.sigma_v = sigma_v;
    inst.seed = seed;
    inst.matrices.resize(truth.q());
    inst.observations.resize(truth.q());
    for (Index k = 0; k < truth.q(); ++k) {
        auto col = measure_column(truth, k, m, sigma_v, seed);
        inst.matrices[k] = std::move(col.a);
        inst.observations[k] = std::move(col.y);
    }
    inst.truth = truth;
    return inst;
}

IncoherenceReport incoherence(const GroundTruth& truth, double mu_bound) {
    IncoherenceReport rep;
    rep.max_col_norm = truth.b_star().colwise().norm().maxCoeff();
    rep.mu = rep.max_col_norm *
             std::sqrt(static_cast<double>(truth.q()) / static_cast<double>(truth.r())) /
             truth.sigma_max();
    rep.kappa = truth.kappa();
    rep.mu_bound = mu_bound;
    rep.within_bound = rep.mu <= mu_bound;
    return rep;
}

double nsr(const GroundTruth& truth, double sigma_v) {
    const double smin = truth.sigma_min();
    return static_cast<double>(truth.q()) * sigma_v * sigma_v / (smin * smin);
}

double sigma_v_for_nsr(const GroundTruth& truth, double target_nsr) {
    if (!(target_nsr >= 0.0)) throw ConfigError("sigma_v_for_nsr: NSR must be nonnegative");
    return truth.sigma_min() * std::sqrt(target_nsr / static_cast<double>(truth.q()));
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& dir) {
    instance.validate();
    std::filesystem::create_directories(dir);

    nlohmann::json meta;
    meta["format"] = "lrcs-instance";
    meta["version"] = 1;
    meta["n"] = instance.n();
    meta["q"] = instance.q();
    meta["m"] = instance.m;
    meta["sigma_v"] = instance.sigma_v;
    meta["seed"] = instance.seed;
    if (instance.truth) {
        const auto& gt = *instance.truth;
        const auto inc = incoherence(gt);
        meta["r"] = gt.r();
        meta["mu"] = inc.mu;
        meta["kappa"] = inc.kappa;
        meta["nsr"] = nsr(gt, instance.sigma_v);
        meta["sigma_star"] = std::vector<double>(gt.sigma_star().data(),
                                                 gt.sigma_star().data() + gt.r());
        write_f64(dir / "Ustar.bin", gt.u_star().data(), gt.u_star().size());
        write_f64(dir / "Bstar.bin", gt.b_star().data(), gt.b_star().size());
    } else {
        meta["r"] = nullptr;
    }
    for (Index k = 0; k < instance.q(); ++k) {
        write_f64(dir / bin_name("A", k), instance.matrices[k].data(), instance.matrices[k].size());
        write_f64(dir / bin_name("y", k), instance.observations[k].data(),
                  instance.observations[k].size());
    }
    std::ofstream out(dir / "meta.json", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

ProblemInstance load_instance(const std::filesystem::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) throw std::runtime_error("cannot open " + (dir / "meta.json").string());
    const auto meta = nlohmann::json::parse(in);
    if (meta.value("format", "") != "lrcs-instance" || meta.value("version", 0) != 1) {
        throw ConfigError("meta.json: unsupported format or version");
    }
    const Index n = meta.at("n").get<Index>();
    const Index q = meta.at("q").get<Index>();

    ProblemInstance inst;
    inst.m = meta.at("m").get<Index>();
    inst.sigma_v = meta.at("sigma_v").get<double>();
    inst.seed = meta.at("seed").get<std::uint64_t>();
    inst.matrices.resize(q);
    inst.observations.resize(q);
    for (Index k = 0; k < q; ++k) {
        inst.matrices[k].resize(inst.m, n);
        read_f64(dir / bin_name("A", k), inst.matrices[k].data(), inst.matrices[k].size());
        inst.observations[k].resize(inst.m);
        read_f64(dir / bin_name("y", k), inst.observations[k].data(), inst.m);
    }
    if (!meta.at("r").is_null() && std::filesystem::exists(dir / "Ustar.bin")) {
        const Index r = meta.at("r").get<Index>();
        const auto sig = meta.at("sigma_star").get<std::vector<double>>();
        if (static_cast<Index>(sig.size()) != r) throw ConfigError("meta.json: sigma_star length != r");
        MatrixXd u(n, r);
        MatrixXd b(r, q);
        read_f64(dir / "Ustar.bin", u.data(), u.size());
        read_f64(dir / "Bstar.bin", b.data(), b.size());
        const VectorXd sigma = Eigen::Map<const VectorXd>(sig.data(), r);
        MatrixXd v = (sigma.cwiseInverse().asDiagonal() * b).transpose();
        inst.truth = GroundTruth::from_factors(std::move(u), sigma, std::move(v));
    }
    inst.validate();
    return inst;
}

}  // namespace lrcs
