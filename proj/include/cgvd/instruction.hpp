#pragma once

// Deterministic instruction parsing into safe and distractor concept sets.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cgvd {

inline constexpr std::string_view kRobotConcept = "robot";

/// One template: "<verb> <target> [<preposition> <anchor>]". A rule without a
/// preposition accepts anchorless instructions such as "pick up the spoon".
struct GrammarRule {
    std::string verb;
    std::optional<std::string> preposition;
};

struct PlacementGrammar {
    std::vector<GrammarRule> rules;

    // put/place/move x on/onto/in, plus anchorless "pick up".
    static PlacementGrammar defaults();
    static PlacementGrammar from_json(const nlohmann::json& j);
    static PlacementGrammar load(const std::filesystem::path& path);
};

struct ParsedInstruction {
    std::string verb;
    std::string target;
    std::optional<std::string> preposition;
    std::optional<std::string> anchor;

    // Renders back through the template; equals normalize_instruction() of the source.
    std::string render() const;
    bool operator==(const ParsedInstruction&) const = default;
};

ParsedInstruction parse_instruction(std::string_view text,
                                    const PlacementGrammar& grammar = PlacementGrammar::defaults());

// Lower-cased, whitespace-collapsed, leading articles stripped from each phrase.
std::string normalize_instruction(std::string_view text,
                                  const PlacementGrammar& grammar = PlacementGrammar::defaults());

class DistractorLexicon {
  public:
    DistractorLexicon() = default;
    explicit DistractorLexicon(std::map<std::string, std::vector<std::string>> domains);

    static DistractorLexicon from_json(const nlohmann::json& j);
    static DistractorLexicon load(const std::filesystem::path& path);

    bool contains(const std::string& domain) const { return domains_.count(domain) != 0; }
    const std::vector<std::string>& at(const std::string& domain) const;
    const std::map<std::string, std::vector<std::string>>& domains() const { return domains_; }

  private:
    std::map<std::string, std::vector<std::string>> domains_;
};

struct ConceptDecomposition {
    std::string target;
    std::optional<std::string> anchor;
    std::vector<std::string> distractors;

    // {target, anchor?, robot}
    std::vector<std::string> safe_set() const;
    // Every concept queried at t=0: safe set followed by distractors.
    std::vector<std::string> all_concepts() const;
};

// Case-insensitive exact match, no stemming.
bool same_concept(std::string_view a, std::string_view b);

ConceptDecomposition decompose(std::string_view instruction, const DistractorLexicon& lexicon,
                               const std::string& domain,
                               const PlacementGrammar& grammar = PlacementGrammar::defaults());

} // namespace cgvd
