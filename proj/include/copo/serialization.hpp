#pragma once

#include "copo/benders.hpp"
#include "copo/instance.hpp"
#include "copo/types.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace copo {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal representation; infinities become the literal
// sentinels "inf" / "-inf" (the project never emits NaN).
std::string format_double(double v);

// Instance documents: schema-versioned JSON with explicit dimensions and
// row-major dense matrices. serialize -> parse -> serialize is
// byte-identical, making the file the cross-language ground truth.
ordered_json instance_to_json(const BlockQcqpInstance& inst);
BlockQcqpInstance instance_from_json(const ordered_json& doc);
std::string serialize_instance(const BlockQcqpInstance& inst);
BlockQcqpInstance parse_instance(const std::string& text);
void save_instance(const std::string& path, const BlockQcqpInstance& inst);
BlockQcqpInstance load_instance(const std::string& path);

// Benders run reports. CSV column order is fixed:
// k,LB,UB,gap,n_opt_cuts,n_feas_cuts,t_total_s,t_parallel_s.
std::string benders_report_csv(const BendersResult& res);
ordered_json benders_report_json(const BendersResult& res);

// Cut pools, for the audit verb and for resuming analysis offline.
ordered_json cuts_to_json(const BlockQcqpInstance& inst,
                          const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                          const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts);
std::pair<std::vector<std::vector<EnvelopeCertificate>>,
          std::vector<std::vector<EnvelopeCertificate>>>
cuts_from_json(const ordered_json& doc);

}  // namespace copo
