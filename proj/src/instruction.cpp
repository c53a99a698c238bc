#include "cgvd/instruction.hpp"

#include "cgvd/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cgvd {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::string s = lower(text);
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) || s.back() == '.' ||
                          s.back() == '!')) {
        s.pop_back();
    }
    std::istringstream in(s);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) {
        tokens.push_back(t);
    }
    return tokens;
}

bool is_article(const std::string& t) { return t == "the" || t == "a" || t == "an"; }

std::string join(std::vector<std::string>::const_iterator first,
                 std::vector<std::string>::const_iterator last) {
    std::string out;
    for (auto it = first; it != last; ++it) {
        if (!out.empty()) {
            out += ' ';
        }
        out += *it;
    }
    return out;
}

std::string phrase(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
    while (begin < end && is_article(tokens[begin])) {
        ++begin;
    }
    return join(tokens.begin() + std::ptrdiff_t(begin), tokens.begin() + std::ptrdiff_t(end));
}

// Number of leading tokens consumed by `verb`, or 0 when it does not match.
std::size_t match_verb(const std::vector<std::string>& tokens, const std::string& verb) {
    const auto verb_tokens = tokenize(verb);
    if (verb_tokens.empty() || verb_tokens.size() > tokens.size()) {
        return 0;
    }
    return std::equal(verb_tokens.begin(), verb_tokens.end(), tokens.begin()) ? verb_tokens.size()
                                                                              : 0;
}

} // namespace

PlacementGrammar PlacementGrammar::defaults() {
    PlacementGrammar g;
    for (const char* verb : {"put", "place", "move"}) {
        for (const char* prep : {"on", "onto", "in"}) {
            g.rules.push_back({verb, std::string(prep)});
        }
    }
    g.rules.push_back({"pick up", std::nullopt});
    return g;
}

PlacementGrammar PlacementGrammar::from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw Error(ErrorCode::InvalidConfig, "grammar must be a JSON list");
    }
    PlacementGrammar g;
    for (const auto& entry : j) {
        GrammarRule rule;
        rule.verb = lower(entry.at("verb").get<std::string>());
        if (entry.contains("preposition") && !entry.at("preposition").is_null()) {
            rule.preposition = lower(entry.at("preposition").get<std::string>());
        }
        if (tokenize(rule.verb).empty()) {
            throw Error(ErrorCode::InvalidConfig, "grammar rule with empty verb");
        }
        g.rules.push_back(std::move(rule));
    }
    return g;
}

PlacementGrammar PlacementGrammar::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open grammar " + path.string());
    }
    return from_json(nlohmann::json::parse(in));
}

std::string ParsedInstruction::render() const {
    std::string out = verb + " " + target;
    if (preposition && anchor) {
        out += " " + *preposition + " " + *anchor;
    }
    return out;
}

ParsedInstruction parse_instruction(std::string_view text, const PlacementGrammar& grammar) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::InvalidInstruction, "instruction is empty");
    }

    // Prepositional templates: split at the earliest preposition any rule
    // sharing the matched verb accepts.
    for (const auto& rule : grammar.rules) {
        const std::size_t verb_len = match_verb(tokens, rule.verb);
        if (verb_len == 0 || !rule.preposition) {
            continue;
        }
        std::vector<std::string> prepositions;
        for (const auto& r : grammar.rules) {
            if (r.preposition && r.verb == rule.verb) {
                prepositions.push_back(*r.preposition);
            }
        }
        for (std::size_t i = verb_len; i < tokens.size(); ++i) {
            if (std::find(prepositions.begin(), prepositions.end(), tokens[i]) == prepositions.end()) {
                continue;
            }
            ParsedInstruction p;
            p.verb = join(tokens.begin(), tokens.begin() + std::ptrdiff_t(verb_len));
            p.target = phrase(tokens, verb_len, i);
            p.preposition = tokens[i];
            p.anchor = phrase(tokens, i + 1, tokens.size());
            if (p.target.empty() || p.anchor->empty()) {
                throw Error(ErrorCode::EmptyPhrase, "empty target or anchor in '" + std::string(text) + "'");
            }
            if (p.target == *p.anchor) {
                throw Error(ErrorCode::InvalidInstruction, "target equals anchor");
            }
            return p;
        }
    }
    for (const auto& rule : grammar.rules) {
        const std::size_t verb_len = match_verb(tokens, rule.verb);
        if (verb_len == 0 || rule.preposition) {
            continue;
        }
        ParsedInstruction p;
        p.verb = join(tokens.begin(), tokens.begin() + std::ptrdiff_t(verb_len));
        p.target = phrase(tokens, verb_len, tokens.size());
        if (p.target.empty()) {
            throw Error(ErrorCode::EmptyPhrase, "empty target in '" + std::string(text) + "'");
        }
        return p;
    }
    throw Error(ErrorCode::UnsupportedTemplate, "no grammar rule matches '" + std::string(text) + "'");
}

std::string normalize_instruction(std::string_view text, const PlacementGrammar& grammar) {
    return parse_instruction(text, grammar).render();
}

DistractorLexicon::DistractorLexicon(std::map<std::string, std::vector<std::string>> domains)
    : domains_(std::move(domains)) {
    for (const auto& [key, list] : domains_) {
        if (list.empty()) {
            throw Error(ErrorCode::InvalidConfig, "lexicon domain '" + key + "' is empty");
        }
    }
}

DistractorLexicon DistractorLexicon::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidConfig, "lexicon must be a JSON object");
    }
    return DistractorLexicon(j.get<std::map<std::string, std::vector<std::string>>>());
}

DistractorLexicon DistractorLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open lexicon " + path.string());
    }
    return from_json(nlohmann::json::parse(in));
}

const std::vector<std::string>& DistractorLexicon::at(const std::string& domain) const {
    auto it = domains_.find(domain);
    if (it == domains_.end()) {
        throw Error(ErrorCode::UnknownDomain, "lexicon has no domain '" + domain + "'");
    }
    return it->second;
}

std::vector<std::string> ConceptDecomposition::safe_set() const {
    std::vector<std::string> s{target};
    if (anchor) {
        s.push_back(*anchor);
    }
    s.emplace_back(kRobotConcept);
    return s;
}

std::vector<std::string> ConceptDecomposition::all_concepts() const {
    auto all = safe_set();
    all.insert(all.end(), distractors.begin(), distractors.end());
    return all;
}

bool same_concept(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

ConceptDecomposition decompose(std::string_view instruction, const DistractorLexicon& lexicon,
                               const std::string& domain, const PlacementGrammar& grammar) {
    const auto parsed = parse_instruction(instruction, grammar);
    const auto& candidates = lexicon.at(domain);

    ConceptDecomposition d;
    d.target = parsed.target;
    d.anchor = parsed.anchor;
    for (const auto& c : candidates) {
        const bool safe = same_concept(c, d.target) || (d.anchor && same_concept(c, *d.anchor)) ||
                          same_concept(c, kRobotConcept);
        const bool duplicate = std::any_of(d.distractors.begin(), d.distractors.end(),
                                           [&](const std::string& x) { return same_concept(x, c); });
        if (!safe && !duplicate) {
            d.distractors.push_back(c);
        }
    }
    return d;
}

} // namespace cgvd
