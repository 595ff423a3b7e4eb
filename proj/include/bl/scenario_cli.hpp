#pragma once
#include <string>
#include <vector>

#include "bl/crocco_profile.hpp"
#include "bl/line_method.hpp"
#include "bl/physical_reconstruct.hpp"
#include "bl/scenario.hpp"
#include "bl/similarity.hpp"

namespace bl {

// Flat dotted key-value config -> validated Scenario.  Unknown keys and any
// violated assumption bound raise a named ValidationError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// FNV-1a hash of the canonical scenario serialization, 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    bool informational = false;  // failure is a warning unless --strict
};

struct VerifyReport {
    std::vector<Check> checks;
    bool passed() const;        // every non-informational check passed
    bool has_warnings() const;  // some informational check failed
};

// Everything the pipeline produces in memory.
struct PipelineArtifacts {
    ProfileSolution similarity;
    CroccoProfile profile;
    CroccoField field;
    PhysicalField physical;
    bool have_similarity = false, have_profile = false, have_field = false,
         have_physical = false;
};

// Aggregates every module's invariant suite against precomputed artifacts.
VerifyReport verify(const Scenario& scenario,
                    const PipelineArtifacts& artifacts);
// Convenience: runs the full pipeline in memory first.
VerifyReport verify(const Scenario& scenario);

enum class Stage { similarity, profile, march, reconstruct, verify };

// "similarity,march" -> stage list; unknown names raise ValidationError.
std::vector<Stage> parse_stages(const std::string& csv_list);

struct PipelineResult {
    int exit_code = 0;  // 0 pass, 2 validation, 3 solver, 4 verify failure
    double attained_X = 0.0;
    std::vector<std::string> artifacts;  // file names written under out_dir
    VerifyReport report;                 // filled when the verify stage ran
    std::string failure_reason;
};

// Executes the requested stages in dependency order, writing the CSV
// contracts and a run manifest under out_dir.  Partial artifacts are kept
// on failure; the manifest records the attained extent and status.
PipelineResult run_pipeline(const Scenario& scenario,
                            const std::vector<Stage>& stages,
                            const std::string& out_dir,
                            bool strict = false);

struct SweepCell {
    double m = 0.0;
    double scale = 0.0;
    VerifyReport report;
    bool solver_ok = true;
    std::string failure_reason;
};

// verify() per (m, perturbation scale) cell; independent cells run in
// parallel and per-cell failures are recorded without aborting the sweep.
std::vector<SweepCell> sweep(const Scenario& base,
                             const std::vector<double>& m_values,
                             const std::vector<double>& scales);

// CSV emitters (fixed column contracts, deterministic %.17g formatting).
void write_profile_csv(const std::string& path, const ProfileSolution& sol);
void write_crocco_profile_csv(const std::string& path,
                              const CroccoProfile& profile,
                              const SigmaEnvelope& envelope);
void write_field_csv(const std::string& path, const CroccoField& field);
void write_physical_csv(const std::string& path,
                        const PhysicalField& physical);
void write_report_csv(const std::string& path, const VerifyReport& report);
VerifyReport parse_report_csv(const std::string& path);

}  // namespace bl
