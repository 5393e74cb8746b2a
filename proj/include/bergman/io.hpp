#pragma once

// File formats: operator matrices as CSV with a `n alpha d p label` header,
// lattices as CSV (index, center coordinates, cell mass), atomic measures as
// plain text `re im mass_re mass_im` lines (2n coordinate columns for B_2),
// and essential-norm reports as JSON with every sampled curve.

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bergman/essnorm.hpp"
#include "bergman/lattice.hpp"
#include "bergman/operators.hpp"

namespace bergman {

namespace io_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace io_detail

inline void save_matrix_csv(const OperatorMatrix& S, std::ostream& os) {
    const BasisSpec& B = *S.basis;
    os << B.n << ',' << io_detail::fmt(B.alpha) << ',' << B.degree << ','
       << io_detail::fmt(S.p) << ',' << S.label << '\n';
    for (Eigen::Index i = 0; i < S.mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < S.mat.cols(); ++j) {
            if (j) os << ',';
            os << io_detail::fmt(S.mat(i, j).real()) << ','
               << io_detail::fmt(S.mat(i, j).imag());
        }
        os << '\n';
    }
}

inline void save_matrix_csv(const OperatorMatrix& S, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_matrix_csv: cannot open " + path);
    save_matrix_csv(S, f);
}

struct LoadedMatrix {
    Eigen::MatrixXcd mat;
    int n = 1;
    double alpha = 0.0;
    int degree = 0;
    double p = 2.0;
    std::string label;
};

inline LoadedMatrix load_matrix_csv(std::istream& is) {
    LoadedMatrix out;
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("load_matrix_csv: empty input");
    {
        std::stringstream ss(header);
        std::string tok;
        std::getline(ss, tok, ',');
        out.n = std::stoi(tok);
        std::getline(ss, tok, ',');
        out.alpha = std::stod(tok);
        std::getline(ss, tok, ',');
        out.degree = std::stoi(tok);
        std::getline(ss, tok, ',');
        out.p = std::stod(tok);
        std::getline(ss, out.label);
    }
    const std::size_t dim = basis_dim(out.n, out.degree);
    out.mat.resize(dim, dim);
    std::string line;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("load_matrix_csv: short file");
        std::stringstream ss(line);
        std::string tok;
        for (std::size_t j = 0; j < dim; ++j) {
            std::getline(ss, tok, ',');
            const double re = std::stod(tok);
            std::getline(ss, tok, ',');
            const double im = std::stod(tok);
            out.mat(i, j) = Complex(re, im);
        }
    }
    return out;
}

inline void save_lattice_csv(const Lattice& lat, const Measure& mu, std::ostream& os) {
    const int n = lat.grid->n;
    os << "m";
    for (int j = 0; j < n; ++j) os << ",re_w" << j + 1 << ",im_w" << j + 1;
    os << ",cell_mass\n";
    for (std::size_t m = 0; m < lat.center_count(); ++m) {
        os << m;
        const BallPoint w = lat.center_point(m);
        for (int j = 0; j < n; ++j)
            os << ',' << io_detail::fmt(w[j].real()) << ',' << io_detail::fmt(w[j].imag());
        os << ',' << io_detail::fmt(mu.atoms()[m].mass.real()) << '\n';
    }
}

inline void save_atoms(const Measure& mu, std::ostream& os) {
    if (mu.kind() != Measure::Kind::Atomic)
        throw std::domain_error("save_atoms: measure is not atomic");
    for (const Atom& a : mu.atoms()) {
        for (int j = 0; j < mu.dim(); ++j)
            os << io_detail::fmt(a.location[j].real()) << ' '
               << io_detail::fmt(a.location[j].imag()) << ' ';
        os << io_detail::fmt(a.mass.real()) << ' ' << io_detail::fmt(a.mass.imag()) << '\n';
    }
}

inline Measure load_atoms(std::istream& is, int n) {
    std::vector<Atom> atoms;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::array<Complex, BallPoint::kMaxDim> c{};
        double re, im;
        for (int j = 0; j < n; ++j) {
            ss >> re >> im;
            c[j] = Complex(re, im);
        }
        ss >> re >> im;
        if (!ss) throw std::runtime_error("load_atoms: malformed line: " + line);
        atoms.push_back(Atom{BallPoint(c.data(), n), Complex(re, im), -1});
    }
    return Measure::atomic(std::move(atoms), n, "file");
}

inline Measure load_atoms(const std::string& path, int n) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_atoms: cannot open " + path);
    return load_atoms(f, n);
}

inline nlohmann::json report_json(const EssNormReport& rep) {
    nlohmann::json j;
    j["label"] = rep.label;
    j["shells"] = rep.scan.shells;
    j["shell_degrees"] = rep.scan.degrees;
    j["shell_reliable"] = rep.scan.reliable;
    j["translate_max"] = rep.scan.colnorm_max;
    j["spectral_radius_max"] = rep.scan.specrad_max;
    j["berezin_max_per_shell"] = rep.scan.berezin_max;
    j["cs_cutoffs"] = rep.cfg.cs_cutoffs;
    j["cs_curve"] = rep.cs_curve;
    j["bs_shells"] = rep.bs_shells;
    j["bs_values"] = rep.bs_values;
    j["bs_r"] = rep.cfg.bs_r;
    j["as_shells"] = rep.as_shells;
    j["as_values"] = rep.as_values;
    j["as_empty_probes"] = rep.as_empty;
    j["as_r"] = rep.cfg.as_r;
    j["ess_norm_estimate"] = rep.ess_norm_estimate;
    j["ess_spectral_radius_estimate"] = rep.specrad_estimate;
    j["cs_estimate"] = rep.cs_estimate;
    j["berezin_max"] = rep.berezin_max;
    j["verdict"] = to_string(rep.verdict);
    j["thresholds"] = {{"berezin_compact_max", rep.cfg.berezin_compact_max},
                       {"cs_compact_max", rep.cfg.cs_compact_max}};
    return j;
}

}  // namespace bergman
