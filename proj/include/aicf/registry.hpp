#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aicf/descriptors.hpp"
#include "aicf/errors.hpp"

namespace aicf {

enum class ConflictPolicy : std::uint8_t { Reject, PriorityPreempt };

std::string_view to_string(ConflictPolicy policy);
std::optional<ConflictPolicy> conflict_policy_from_string(std::string_view name);

/// A claim that was taken away from an app (preemption or node removal).
struct Revocation {
  std::string app_id;
  std::string node_id;
  std::string param;

  bool operator==(const Revocation&) const = default;
};

/// The Register's state machine: node/app descriptors plus exclusive
/// control-parameter claims. All mutations are atomic check-then-commit; a
/// failed operation leaves the state untouched and reports every missing or
/// conflicting item at once.
class Registry {
 public:
  explicit Registry(ConflictPolicy policy = ConflictPolicy::Reject) : policy_(policy) {}

  struct Outcome {
    bool ok = false;
    RegistryError error;
    std::vector<Revocation> revocations;
  };

  Outcome register_node(const NodeDescriptor& descriptor);
  Outcome register_app(const AppDescriptor& descriptor);

  enum class Kind { Node, App };
  Outcome deregister(Kind kind, const std::string& id);

  // Lookups (read-only).
  std::vector<NodeDescriptor> all_nodes() const;
  std::optional<NodeDescriptor> node(const std::string& id) const;
  std::vector<AppDescriptor> apps() const;
  /// (node_id, param, app_id) triples, sorted.
  std::vector<std::tuple<std::string, std::string, std::string>> claims() const;
  std::optional<std::string> claim_holder(const std::string& node_id,
                                          const std::string& param) const;

  ConflictPolicy policy() const { return policy_; }

  /// Service-level metadata: which sender registered an app (used to route
  /// REVOKED notices). Persisted with the snapshot.
  void set_app_origin(const std::string& app_id, const std::string& sender);
  std::optional<std::string> app_origin(const std::string& app_id) const;

  json snapshot_json() const;
  static std::optional<Registry> from_snapshot_json(const json& doc);
  /// Writes the snapshot atomically (temp file + rename). Throws
  /// std::runtime_error on IO failure.
  void save(const std::string& path) const;
  /// Returns nothing when the file is missing/unreadable/malformed.
  static std::optional<Registry> load(const std::string& path);

  bool operator==(const Registry& other) const;

 private:
  ConflictPolicy policy_;
  std::map<std::string, NodeDescriptor> nodes_;
  std::map<std::string, AppDescriptor> apps_;
  std::map<std::pair<std::string, std::string>, std::string> claims_;
  std::map<std::string, std::string> origins_;
};

}  // namespace aicf
