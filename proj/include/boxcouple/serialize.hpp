#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"

#include "boxcouple/boxspace.hpp"
#include "boxcouple/coarse.hpp"
#include "boxcouple/coupling.hpp"
#include "boxcouple/ghmetric.hpp"
#include "boxcouple/groups.hpp"
#include "boxcouple/limits.hpp"
#include "boxcouple/measures.hpp"
#include "boxcouple/metric_space.hpp"

namespace boxcouple::io {

using json = nlohmann::ordered_json;

/// Doubles with an exact integer value are written as integers.
json number(double v);

json read_file(const std::filesystem::path& path);
/// Two-space indentation and a trailing newline.
void write_file(const std::filesystem::path& path, const json& value);
std::string dump(const json& value);

json to_json(const groups::MarkedGroup& g);
json to_json(const groups::QuotientCarrier& c);
json to_json(const groups::FiniteQuotient& q);
json to_json(const groups::NormalChain& chain);
json to_json(const FiniteMetricSpace& space);
json to_json(const coarse::GroupSpace& space);
json to_json(const coarse::MapRecord& f);
json to_json(const coarse::MapSpace& space);
json to_json(const coarse::VerifyReport& report);
json to_json(const coarse::EpsNet& net);
json to_json(const coarse::ActResult& result);
json to_json(const limits::PartialMap& pm);
json to_json(const limits::PartialReport& report);
json to_json(const gh::GHResult& result);
json to_json(const gh::IsometryReport& report);
json to_json(const gh::EvidenceItem& item);
json to_json(const gh::ConvergenceEvidence& evidence);
json to_json(const measures::GroupAction& action);
json to_json(const measures::FiniteMeasure& mu);
json to_json(const measures::ProkhorovResult& result);
json to_json(const measures::DefectReport& report);
json to_json(const measures::WeakStarEvidence& evidence);
json to_json(const coupling::GSpace& space);
json to_json(const coupling::EquivariantMapReport& report);
json to_json(const coupling::Extension& ext);
json to_json(const coupling::PreimageReport& report);
json to_json(const coupling::SuiteSummary& summary);
json to_json(const box::GraphDiagnostics& d);
json to_json(const box::ExpanderReport& report);

template <class T>
T parse(const json& j);

template <> std::shared_ptr<const groups::MarkedGroup> parse(const json& j);
template <> groups::QuotientCarrier parse(const json& j);
template <> std::shared_ptr<const groups::FiniteQuotient> parse(const json& j);
template <> groups::NormalChain parse(const json& j);
template <> FiniteMetricSpace parse(const json& j);
template <> std::shared_ptr<const coarse::GroupSpace> parse(const json& j);
template <> coarse::MapRecord parse(const json& j);
template <> coarse::MapSpace parse(const json& j);
template <> coarse::VerifyReport parse(const json& j);
template <> coarse::EpsNet parse(const json& j);
template <> limits::PartialMap parse(const json& j);
template <> limits::PartialReport parse(const json& j);
template <> gh::GHResult parse(const json& j);
template <> gh::EvidenceItem parse(const json& j);
template <> gh::ConvergenceEvidence parse(const json& j);
template <> measures::GroupAction parse(const json& j);
template <> measures::FiniteMeasure parse(const json& j);
template <> measures::DefectReport parse(const json& j);
template <> coupling::GSpace parse(const json& j);
template <> coupling::Extension parse(const json& j);
template <> coupling::PreimageReport parse(const json& j);
template <> box::GraphDiagnostics parse(const json& j);
template <> box::ExpanderReport parse(const json& j);

/// Chains compare by family, group, and per-level carriers, elements and connecting maps.
bool same_chain(const groups::NormalChain& a, const groups::NormalChain& b);
bool same_space(const coarse::GroupSpace& a, const coarse::GroupSpace& b);

}  // namespace boxcouple::io
