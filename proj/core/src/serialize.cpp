#include "mfollow/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mfollow/errors.hpp"

namespace mfollow {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

nlohmann::json tree_to_json(const ScenarioTree& tree) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "scenario_tree";
    j["grid"] = {{"horizon", tree.grid().horizon()}, {"times", tree.grid().times()}};
    j["dim"] = tree.dim();
    j["root"] = tree.root();
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes()) {
        json node;
        node["id"] = n.id;
        node["time_index"] = n.time_index;
        if (n.parent == kNoNode)
            node["parent"] = nullptr;
        else
            node["parent"] = n.parent;
        json children = json::array();
        for (std::size_t c = 0; c < n.children.size(); ++c)
            children.push_back({{"id", n.children[c]}, {"prob", n.child_probs[c]}});
        node["children"] = children;
        node["l"] = n.l_value;
        nodes.push_back(node);
    }
    j["nodes"] = nodes;
    return j;
}

ScenarioTree tree_from_json(const json& j) {
    TimeGrid grid(j.at("grid").at("times").get<std::vector<double>>());
    std::vector<TreeNode> nodes(j.at("nodes").size());
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.id = jn.at("id").get<std::size_t>();
        n.time_index = jn.at("time_index").get<std::size_t>();
        n.parent = jn.at("parent").is_null() ? kNoNode : jn.at("parent").get<std::size_t>();
        for (const auto& c : jn.at("children")) {
            n.children.push_back(c.at("id").get<std::size_t>());
            n.child_probs.push_back(c.at("prob").get<double>());
        }
        n.l_value = jn.at("l").get<std::vector<double>>();
        if (n.id >= nodes.size())
            throw precondition_error("tree_from_json: node id out of range");
        nodes[n.id] = std::move(n);
    }
    return ScenarioTree(std::move(grid), std::move(nodes), j.at("root").get<std::size_t>());
}

nlohmann::json plan_to_json(const ControlPlan& plan) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "control_plan";
    j["k"] = plan.k;
    j["initial_jump"] = plan.initial_jump;
    j["increments"] = plan.increments;
    if (plan.lipschitz_rate)
        j["lipschitz_rate"] = *plan.lipschitz_rate;
    else
        j["lipschitz_rate"] = nullptr;
    return j;
}

ControlPlan plan_from_json(const json& j, const ScenarioTree& tree) {
    ControlPlan plan;
    plan.tree = &tree;
    plan.k = j.at("k").get<std::size_t>();
    plan.initial_jump = j.at("initial_jump").get<std::vector<double>>();
    plan.increments = j.at("increments").get<std::vector<std::vector<double>>>();
    if (!j.at("lipschitz_rate").is_null())
        plan.lipschitz_rate = j.at("lipschitz_rate").get<double>();
    plan.validate();
    return plan;
}

nlohmann::json solve_report_to_json(const SolveReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "solve_report";
    j["value"] = report.value;
    j["iterations"] = report.iterations;
    j["kkt_residual"] = report.kkt_residual;
    j["converged"] = report.converged;
    j["coercivity_verified"] = report.coercivity_verified;
    j["value_trace"] = report.value_trace;
    return j;
}

nlohmann::json certificate_to_json(const FBSDECertificate& cert) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "fbsde_certificate";
    j["negativity_residual"] = cert.negativity_residual;
    j["complementarity_residual"] = cert.complementarity_residual;
    j["complementarity_pathwise"] = cert.complementarity_pathwise;
    j["martingale_defect"] = cert.martingale_defect;
    j["terminal_defect"] = cert.terminal_defect;
    j["admissibility_checked"] = cert.admissibility_checked;
    j["tolerance"] = cert.tolerance;
    j["certified"] = cert.certified;
    return j;
}

nlohmann::json ladder_report_to_json(const LadderReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "ladder_report";
    j["caps"] = report.caps;
    j["values"] = report.values;
    j["iterations"] = report.iterations;
    j["rung_converged"] = report.rung_converged;
    j["uncapped_value"] = report.uncapped_value;
    j["uncapped_converged"] = report.uncapped_converged;
    j["pseudopath_gaps"] = report.pseudopath_gaps;
    j["sup_gaps"] = report.sup_gaps;
    j["successive_gaps"] = report.successive_gaps;
    j["y_negative_integrals"] = report.y_negative_integrals;
    return j;
}

nlohmann::json joint_law_to_json(const JointLaw& law) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "joint_law";
    j["k"] = law.k;
    json rows = json::array();
    for (const auto& row : law.rows)
        rows.push_back({{"path_index", row.path_index},
                        {"a_values", row.a_values},
                        {"probability", row.probability}});
    j["support"] = rows;
    return j;
}

std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0)
                out += ',';
            out += cells[i];
        }
        out += "\r\n";
    };
    append_row(header);
    for (const auto& row : rows)
        append_row(row);
    return out;
}

std::string ladder_csv(const LadderReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < report.caps.size(); ++r) {
        rows.push_back({format_double(report.caps[r]), format_double(report.values[r]),
                        format_double(report.values[r] - report.uncapped_value),
                        format_double(report.pseudopath_gaps[r]),
                        format_double(report.sup_gaps[r]),
                        format_double(report.y_negative_integrals[r]),
                        std::to_string(report.iterations[r])});
    }
    return csv_document(
        {"n", "V_n", "gap_to_V", "pp_distance", "sup_distance", "y_neg_integral", "iterations"},
        rows);
}

std::string stop_region_csv(const ScenarioTree& tree, const AdaptedProcess& z,
                            const SnellEnvelope& snell) {
    std::vector<std::vector<std::string>> rows;
    for (const TreeNode& n : tree.nodes()) {
        std::string lvals;
        for (std::size_t j = 0; j < n.l_value.size(); ++j) {
            if (j > 0)
                lvals += ';';
            lvals += format_double(n.l_value[j]);
        }
        rows.push_back({std::to_string(n.id), format_double(tree.grid().time(n.time_index)),
                        lvals, format_double(z.at(n.id)[0]),
                        format_double(snell.envelope.at(n.id)[0]),
                        snell.stop_region[n.id] ? "1" : "0"});
    }
    return csv_document({"node", "time", "l", "z", "u", "in_region"}, rows);
}

std::string distance_matrix_csv(const std::vector<std::string>& labels,
                                const std::vector<std::vector<double>>& matrix) {
    std::vector<std::string> header{"path"};
    header.insert(header.end(), labels.begin(), labels.end());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row{labels[i]};
        for (double v : matrix[i])
            row.push_back(format_double(v));
        rows.push_back(std::move(row));
    }
    return csv_document(header, rows);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw std::runtime_error("write_file_atomic: short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

} // namespace mfollow
