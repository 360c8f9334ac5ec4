#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "satint/closed_loop.hpp"
#include "satint/gain.hpp"
#include "satint/lemma.hpp"
#include "satint/roa.hpp"

namespace satint {

/// Parsed CSV: header names plus numeric rows ("inf"/"nan" round-trip).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  ///< -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Closed-loop trajectory, columns t,x1..xn,u,y,eta,V,xi1..xin,wcoord.
void write_trajectory_csv(const std::string& path, const std::vector<ClosedLoopRecord>& records,
                          int state_dim);
std::vector<ClosedLoopRecord> read_trajectory_csv(const std::string& path, int state_dim);

/// Equilibrium map, columns u,xi1..xin,G.
void write_equilibrium_csv(const std::string& path, const EquilibriumMap& map);

/// Certificate evidence, columns u0,abscissa,worst_decay_ratio.
void write_evidence_csv(const std::string& path, const StabilityCertificate& cert);

/// Region-of-attraction sweep, columns x1..xn,u0,in_XT,converged,settle_time.
void write_roa_csv(const std::string& path, const std::vector<XtSample>& samples, int state_dim);
std::vector<XtSample> read_roa_csv(const std::string& path, int state_dim);

/// Constants table as JSON (all numbers at 12 significant digits).
nlohmann::json constants_to_json(const GainCertificate& gc);
void write_constants_json(const std::string& path, const GainCertificate& gc);

nlohmann::json lemma_report_to_json(const LemmaReport& report);
void write_lemma_report_json(const std::string& path, const LemmaReport& report);

nlohmann::json windup_to_json(const WindupComparison& cmp);

nlohmann::json gain_selection_to_json(const GainSelection& selection);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/**
 * Parses a grid spec like "x1:-6:6:25,x2:0:1:5,u:-1:1:11" into an RoaGrid.
 * Requires exactly axes x1..xn (in order) followed by u, each with lo:hi:count
 * and count >= 1.
 */
RoaGrid parse_grid_spec(const std::string& text, int state_dim);

}  // namespace satint
