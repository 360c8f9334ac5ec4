#include "satint/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace satint {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    return out;
}

double parse_double(const std::string& s) {
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw InvalidArgument("bad numeric field '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(line);
    while (std::getline(ss, part, sep)) parts.push_back(part);
    return parts;
}

void write_row(std::ofstream& out, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out << ',';
        out << fmt_g12(vals[i]);
    }
    out << '\n';
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("empty CSV '" + path + "'");
    table.header = split(line, ',');
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const std::string& field : split(line, ',')) row.push_back(parse_double(field));
        if (row.size() != table.header.size()) {
            throw InvalidArgument("ragged CSV row in '" + path + "'");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_trajectory_csv(const std::string& path, const std::vector<ClosedLoopRecord>& records,
                          int state_dim) {
    std::ofstream out = open_out(path);
    out << 't';
    for (int i = 1; i <= state_dim; ++i) out << ",x" << i;
    out << ",u,y,eta,V";
    for (int i = 1; i <= state_dim; ++i) out << ",xi" << i;
    out << ",wcoord\n";
    std::vector<double> row;
    for (const ClosedLoopRecord& rec : records) {
        row.clear();
        row.push_back(rec.t);
        for (int i = 0; i < state_dim; ++i) row.push_back(rec.x[i]);
        row.push_back(rec.u);
        row.push_back(rec.y);
        row.push_back(rec.eta);
        row.push_back(rec.V);
        for (int i = 0; i < state_dim; ++i) row.push_back(rec.xi[i]);
        row.push_back(rec.w_coord);
        write_row(out, row);
    }
}

std::vector<ClosedLoopRecord> read_trajectory_csv(const std::string& path, int state_dim) {
    const CsvTable table = read_csv(path);
    const std::size_t expected = 5 + 2 * static_cast<std::size_t>(state_dim) + 1;
    if (table.header.size() != expected) {
        throw InvalidArgument("trajectory CSV '" + path + "' has wrong column count");
    }
    std::vector<ClosedLoopRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ClosedLoopRecord rec;
        std::size_t c = 0;
        rec.t = row[c++];
        rec.x = Eigen::VectorXd(state_dim);
        for (int i = 0; i < state_dim; ++i) rec.x[i] = row[c++];
        rec.u = row[c++];
        rec.y = row[c++];
        rec.eta = row[c++];
        rec.V = row[c++];
        rec.xi = Eigen::VectorXd(state_dim);
        for (int i = 0; i < state_dim; ++i) rec.xi[i] = row[c++];
        rec.w_coord = row[c++];
        records.push_back(std::move(rec));
    }
    return records;
}

void write_equilibrium_csv(const std::string& path, const EquilibriumMap& map) {
    std::ofstream out = open_out(path);
    out << 'u';
    for (int i = 1; i <= map.state_dim(); ++i) out << ",xi" << i;
    out << ",G\n";
    std::vector<double> row;
    for (std::size_t i = 0; i < map.u_grid().size(); ++i) {
        row.clear();
        row.push_back(map.u_grid()[i]);
        for (int d = 0; d < map.state_dim(); ++d) row.push_back(map.xi_values()[i][d]);
        row.push_back(map.g_values()[i]);
        write_row(out, row);
    }
}

void write_evidence_csv(const std::string& path, const StabilityCertificate& cert) {
    std::ofstream out = open_out(path);
    out << "u0,abscissa,worst_decay_ratio\n";
    for (const EvidenceRecord& rec : cert.evidence) {
        write_row(out, {rec.u0, rec.abscissa, rec.worst_m_required});
    }
}

void write_roa_csv(const std::string& path, const std::vector<XtSample>& samples, int state_dim) {
    std::ofstream out = open_out(path);
    for (int i = 1; i <= state_dim; ++i) out << 'x' << i << ',';
    out << "u0,in_XT,converged,settle_time\n";
    std::vector<double> row;
    for (const XtSample& sample : samples) {
        row.clear();
        for (int i = 0; i < state_dim; ++i) row.push_back(sample.x0[i]);
        row.push_back(sample.u0);
        row.push_back(sample.in_XT ? 1.0 : 0.0);
        row.push_back(sample.converged ? 1.0 : 0.0);
        row.push_back(sample.settle_time);
        write_row(out, row);
    }
}

std::vector<XtSample> read_roa_csv(const std::string& path, int state_dim) {
    const CsvTable table = read_csv(path);
    if (table.header.size() != static_cast<std::size_t>(state_dim) + 4) {
        throw InvalidArgument("roa CSV '" + path + "' has wrong column count");
    }
    std::vector<XtSample> samples;
    samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        XtSample sample;
        sample.x0 = Eigen::VectorXd(state_dim);
        std::size_t c = 0;
        for (int i = 0; i < state_dim; ++i) sample.x0[i] = row[c++];
        sample.u0 = row[c++];
        sample.in_XT = row[c++] != 0.0;
        sample.converged = row[c++] != 0.0;
        sample.settle_time = row[c++];
        sample.tested = std::isfinite(sample.settle_time) || sample.converged;
        samples.push_back(std::move(sample));
    }
    return samples;
}

nlohmann::json constants_to_json(const GainCertificate& gc) {
    nlohmann::json j;
    j["certificate_kind"] = "sampled certificate";
    j["m"] = round12(gc.m);
    j["lambda"] = round12(gc.lambda);
    j["eps0"] = round12(gc.eps0);
    j["L1"] = round12(gc.L1);
    j["L2"] = round12(gc.L2);
    j["delta_g"] = round12(gc.delta_g);
    j["alpha"] = round12(gc.alpha);
    j["mu"] = round12(gc.mu);
    j["T"] = round12(gc.T);
    j["kappa"] = round12(gc.kappa);
    j["lambda_tilde"] = round12(gc.lambda_tilde);
    j["k_max"] = round12(gc.k_max);
    j["W_radius"] = round12(gc.W_radius);
    return j;
}

void write_constants_json(const std::string& path, const GainCertificate& gc) {
    write_json(path, constants_to_json(gc));
}

nlohmann::json lemma_report_to_json(const LemmaReport& report) {
    nlohmann::json j;
    j["lemma"] = report.lemma_id;
    j["instances"] = report.instances;
    j["violations"] = report.violations;
    j["marginal"] = report.marginal;
    j["worst_margin"] = round12(report.worst_margin);
    j["horizon"] = round12(report.horizon_used);
    if (report.lemma_id == "gain") {
        j["k_used"] = round12(report.k_used);
        j["output_contraction_checked"] = report.contraction_checked;
    }
    j["disclaimer"] = report.disclaimer;
    nlohmann::json details = nlohmann::json::array();
    for (const InstanceDetail& d : report.details) {
        nlohmann::json dj;
        dj["epsilon"] = round12(d.epsilon);
        dj["u_start"] = round12(d.u_start);
        dj["rho"] = round12(d.rho);
        dj["margin"] = round12(d.margin);
        if (report.lemma_id == "gain") dj["tau_emp"] = round12(d.tau_emp);
        dj["violated"] = d.violated;
        dj["marginal"] = d.marginal;
        details.push_back(std::move(dj));
    }
    j["details"] = std::move(details);
    return j;
}

void write_lemma_report_json(const std::string& path, const LemmaReport& report) {
    write_json(path, lemma_report_to_json(report));
}

nlohmann::json windup_to_json(const WindupComparison& cmp) {
    auto metrics = [](const WindupRunMetrics& m) {
        nlohmann::json j;
        j["recovery_time"] = std::isfinite(m.recovery_time)
                                 ? nlohmann::json(round12(m.recovery_time))
                                 : nlohmann::json("inf");
        j["drive_min"] = round12(m.drive_min);
        j["drive_max"] = round12(m.drive_max);
        j["final_error"] = round12(m.final_error);
        return j;
    };
    nlohmann::json j;
    j["saturating_integrator"] = metrics(cmp.saturating);
    j["clamped_output_integrator"] = metrics(cmp.clamped);
    return j;
}

nlohmann::json gain_selection_to_json(const GainSelection& selection) {
    nlohmann::json j;
    j["k_empirical"] = round12(selection.k_emp);
    j["k_empirical_note"] = "largest tested gain under which all sampled members converged";
    j["k_certified"] = round12(selection.k_cert);
    j["k_certified_note"] = "conservative bound from the sampled certificate constants";
    j["halvings"] = selection.halvings;
    j["members_tested"] = selection.members_tested;
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("bad JSON in '" + path + "': " + e.what());
    }
    return j;
}

RoaGrid parse_grid_spec(const std::string& text, int state_dim) {
    const std::vector<std::string> axes = split(text, ',');
    if (axes.size() != static_cast<std::size_t>(state_dim) + 1) {
        throw InvalidArgument("grid spec needs axes x1..x" + std::to_string(state_dim) +
                              " and u, got '" + text + "'");
    }
    RoaGrid grid;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::vector<std::string> parts = split(axes[i], ':');
        if (parts.size() != 4) {
            throw InvalidArgument("malformed grid axis '" + axes[i] + "' (want name:lo:hi:count)");
        }
        const std::string expected =
            i < static_cast<std::size_t>(state_dim) ? "x" + std::to_string(i + 1) : "u";
        if (parts[0] != expected) {
            throw InvalidArgument("grid axis " + std::to_string(i) + " must be named '" + expected +
                                  "', got '" + parts[0] + "'");
        }
        GridAxis axis;
        axis.lo = parse_double(parts[1]);
        axis.hi = parse_double(parts[2]);
        const double count = parse_double(parts[3]);
        if (!(count >= 1.0) || count != std::floor(count)) {
            throw InvalidArgument("malformed grid axis '" + axes[i] + "': count must be a positive integer");
        }
        axis.count = static_cast<int>(count);
        if (axis.count > 1 && !(axis.lo < axis.hi)) {
            throw InvalidArgument("malformed grid axis '" + axes[i] + "': need lo < hi");
        }
        if (i < static_cast<std::size_t>(state_dim)) {
            grid.x_axes.push_back(axis);
        } else {
            grid.u_axis = axis;
        }
    }
    return grid;
}

}  // namespace satint
