#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "curate/error.hpp"
#include "curate/record.hpp"
#include "curate/text.hpp"

namespace curate {

// Per-repository file dependency graph. An edge (importer -> imported)
// means the imported file must precede the importer in the ordered output.
struct RepoGraph {
    std::string repo_id;
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;  // importer -> imported
};

struct BrokenEdge {
    std::string repo_id;
    std::string importer;
    std::string imported;
};

struct RepoDocument {
    std::string repo_id;
    std::vector<std::string> ordered_paths;
    std::string content;
    std::string language;  // most common member language
};

namespace detail {

inline std::string strip_extension(std::string_view path) {
    auto dot = path.rfind('.');
    auto slash = path.find_last_of('/');
    if (dot == std::string_view::npos) return std::string(path);
    if (slash != std::string_view::npos && dot < slash) return std::string(path);
    return std::string(path.substr(0, dot));
}

// Resolves "./a", "../b", and bare relative references against the
// importing file's directory, dropping redundant components.
inline std::string normalize_relative(std::string_view importer_dir, std::string_view ref) {
    std::vector<std::string> parts;
    auto push_path = [&](std::string_view p) {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= p.size(); ++i) {
            if (i == p.size() || p[i] == '/') {
                std::string_view part = p.substr(start, i - start);
                start = i + 1;
                if (part.empty() || part == ".") continue;
                if (part == "..") {
                    if (!parts.empty()) parts.pop_back();
                    continue;
                }
                parts.emplace_back(part);
            }
        }
    };
    if (!starts_with(ref, "/")) push_path(importer_dir);
    push_path(ref);
    std::string out;
    for (const auto& part : parts) {
        if (!out.empty()) out.push_back('/');
        out += part;
    }
    return out;
}

inline std::string dir_of(std::string_view path) {
    auto slash = path.find_last_of('/');
    return slash == std::string_view::npos ? "" : std::string(path.substr(0, slash));
}

// Candidate module references pulled from one line, if it is an import
// statement for the record's language family.
inline std::vector<std::string> import_refs_in_line(std::string_view line,
                                                    std::string_view language) {
    std::vector<std::string> refs;
    std::string_view t = trim(line);
    auto take_quoted = [&](std::string_view s) {
        auto q1 = s.find_first_of("\"'<");
        if (q1 == std::string_view::npos) return;
        char open = s[q1];
        char close = open == '<' ? '>' : open;
        auto q2 = s.find(close, q1 + 1);
        if (q2 == std::string_view::npos) return;
        refs.emplace_back(s.substr(q1 + 1, q2 - q1 - 1));
    };
    if (language == "python") {
        if (starts_with(t, "import ")) {
            // import a.b as x, c.d
            std::string_view rest = t.substr(7);
            std::size_t start = 0;
            for (std::size_t i = 0; i <= rest.size(); ++i) {
                if (i == rest.size() || rest[i] == ',') {
                    std::string_view item = trim(rest.substr(start, i - start));
                    start = i + 1;
                    auto as_pos = item.find(" as ");
                    if (as_pos != std::string_view::npos) item = trim(item.substr(0, as_pos));
                    if (item.empty()) continue;
                    std::string dotted(item);
                    std::replace(dotted.begin(), dotted.end(), '.', '/');
                    refs.push_back(dotted);
                }
            }
        } else if (starts_with(t, "from ")) {
            std::string_view rest = t.substr(5);
            auto import_pos = rest.find(" import ");
            if (import_pos != std::string_view::npos) {
                std::string_view module = trim(rest.substr(0, import_pos));
                if (!module.empty() && module.front() != '.') {
                    std::string dotted(module);
                    std::replace(dotted.begin(), dotted.end(), '.', '/');
                    refs.push_back(dotted);
                } else if (!module.empty()) {
                    // Relative: "from .util import x" / "from ..pkg import y"
                    std::size_t dots = 0;
                    while (dots < module.size() && module[dots] == '.') ++dots;
                    std::string rel;
                    for (std::size_t d = 1; d < dots; ++d) rel += "../";
                    std::string tail(module.substr(dots));
                    std::replace(tail.begin(), tail.end(), '.', '/');
                    refs.push_back("./" + rel + tail);
                }
            }
        }
    } else if (language == "c" || language == "cpp") {
        if (starts_with(t, "#include")) take_quoted(t);
    } else if (language == "javascript") {
        if (starts_with(t, "import ") || t.find("require(") != std::string_view::npos ||
            starts_with(t, "export ")) {
            take_quoted(t);
        }
    } else if (language == "java" || language == "csharp") {
        if (starts_with(t, "import ") || starts_with(t, "using ")) {
            std::string_view rest = t.substr(t[0] == 'i' ? 7 : 6);
            auto semi = rest.find(';');
            if (semi != std::string_view::npos) rest = rest.substr(0, semi);
            rest = trim(rest);
            if (starts_with(rest, "static ")) rest = trim(rest.substr(7));
            if (!rest.empty() && rest.find('=') == std::string_view::npos) {
                std::string dotted(rest);
                std::replace(dotted.begin(), dotted.end(), '.', '/');
                refs.push_back(dotted);
            }
        }
    } else {
        // Unknown language: try the generic forms.
        if (starts_with(t, "#include") || starts_with(t, "import ") ||
            t.find("require(") != std::string_view::npos) {
            take_quoted(t);
            if (refs.empty() && starts_with(t, "import ")) {
                std::string dotted(trim(t.substr(7)));
                std::replace(dotted.begin(), dotted.end(), '.', '/');
                refs.push_back(dotted);
            }
        }
    }
    return refs;
}

}  // namespace detail

// Statement-level import extraction, resolved against sibling paths by
// module-name / path matching. References that resolve to no sibling
// (system headers, external packages) are ignored.
inline std::set<std::string> extract_imports(const DocumentRecord& file,
                                             const std::set<std::string>& siblings) {
    std::set<std::string> imports;

    // Index siblings by full path, path-without-extension, and basename
    // without extension.
    std::map<std::string, std::vector<std::string>> by_key;
    for (const auto& sib : siblings) {
        by_key[sib].push_back(sib);
        by_key[detail::strip_extension(sib)].push_back(sib);
        auto slash = sib.find_last_of('/');
        std::string base = slash == std::string::npos ? sib : sib.substr(slash + 1);
        by_key[detail::strip_extension(base)].push_back(sib);
    }
    auto resolve = [&](const std::string& key) -> std::string {
        auto it = by_key.find(key);
        if (it == by_key.end()) return "";
        // Deterministic pick: lexicographically smallest match.
        return *std::min_element(it->second.begin(), it->second.end());
    };

    const std::string dir = detail::dir_of(file.path);
    for (auto line : split_lines(file.content)) {
        for (const auto& ref : detail::import_refs_in_line(line, file.language)) {
            std::string resolved;
            if (starts_with(ref, "./") || starts_with(ref, "../")) {
                std::string normalized = detail::normalize_relative(dir, ref);
                resolved = resolve(normalized);
                if (resolved.empty()) resolved = resolve(detail::strip_extension(normalized));
            } else {
                // Try relative to the importer's directory first, then from
                // the repo root, then by bare module name.
                std::string local = detail::normalize_relative(dir, ref);
                resolved = resolve(local);
                if (resolved.empty()) resolved = resolve(ref);
                if (resolved.empty()) {
                    auto slash = ref.find_last_of('/');
                    if (slash != std::string::npos) resolved = resolve(ref.substr(slash + 1));
                }
            }
            if (!resolved.empty() && resolved != file.path) imports.insert(resolved);
        }
    }
    return imports;
}

inline RepoGraph build_repo_graph(const std::string& repo_id,
                                  const std::vector<DocumentRecord>& files) {
    RepoGraph graph;
    graph.repo_id = repo_id;
    std::set<std::string> paths;
    for (const auto& f : files) {
        if (!paths.insert(f.path).second) {
            throw DuplicatePath("repo '" + repo_id + "' has duplicate path '" + f.path + "'");
        }
    }
    graph.nodes = paths;
    for (const auto& f : files) {
        for (const auto& imported : extract_imports(f, paths)) {
            if (imported != f.path) graph.edges.emplace(f.path, imported);
        }
    }
    return graph;
}

struct TopoResult {
    std::vector<std::string> order;
    std::vector<BrokenEdge> broken;
};

// Kahn's algorithm over the import graph: a file is ready once all of its
// imports are placed; ready files are emitted in lexicographic path order.
// When a cycle stalls the queue, the remaining edge with the
// lexicographically greatest imported path (ties: greatest importer) is
// deleted, reported, and the walk resumes.
inline TopoResult topo_order(const RepoGraph& graph) {
    TopoResult result;
    std::map<std::string, std::set<std::string>> pending;   // importer -> unplaced imports
    std::map<std::string, std::set<std::string>> importers; // imported -> importers
    for (const auto& node : graph.nodes) pending[node];
    for (const auto& [importer, imported] : graph.edges) {
        if (importer == imported) continue;
        if (!graph.nodes.count(importer) || !graph.nodes.count(imported)) continue;
        pending[importer].insert(imported);
        importers[imported].insert(importer);
    }

    std::set<std::string> ready;
    for (const auto& [node, imports] : pending) {
        if (imports.empty()) ready.insert(node);
    }
    std::set<std::string> placed;

    while (placed.size() < graph.nodes.size()) {
        if (ready.empty()) {
            // Stalled on a cycle: delete the edge with the greatest imported
            // path among edges between unplaced nodes.
            std::pair<std::string, std::string> victim;  // importer, imported
            bool found = false;
            for (const auto& [importer, imports] : pending) {
                if (placed.count(importer)) continue;
                for (const auto& imported : imports) {
                    std::pair<std::string, std::string> edge{importer, imported};
                    if (!found || imported > victim.second ||
                        (imported == victim.second && importer > victim.first)) {
                        victim = edge;
                        found = true;
                    }
                }
            }
            if (!found) break;  // defensive: nothing left to break
            pending[victim.first].erase(victim.second);
            importers[victim.second].erase(victim.first);
            result.broken.push_back({graph.repo_id, victim.first, victim.second});
            if (pending[victim.first].empty() && !placed.count(victim.first)) {
                ready.insert(victim.first);
            }
            continue;
        }
        std::string node = *ready.begin();
        ready.erase(ready.begin());
        placed.insert(node);
        result.order.push_back(node);
        auto it = importers.find(node);
        if (it == importers.end()) continue;
        for (const auto& importer : it->second) {
            auto& imports = pending[importer];
            imports.erase(node);
            if (imports.empty() && !placed.count(importer)) ready.insert(importer);
        }
    }
    return result;
}

// Per-language comment leader for the file separator line.
inline std::string file_separator(const std::string& language, const std::string& path) {
    std::string leader = language == "python" ? "#" : "//";
    return leader + " FILE: " + path + "\n";
}

// Syntax validation hook. Full AST validation needs external parsers; the
// built-in check is a bracket / indentation sanity pass only.
using SyntaxCheckHook = std::function<bool(const DocumentRecord&)>;

// Brackets of each kind must pair up outside quoted spans and line
// comments, and python indentation must not mix tabs and spaces within one
// line's leading whitespace.
inline bool bracket_sanity_check(std::string_view content, std::string_view language) {
    const bool hash_comments = language == "python" || language == "unknown";
    const bool slash_comments = language != "python";
    long round = 0, square = 0, curly = 0;
    for (auto line : split_lines(content)) {
        if (language == "python" || language == "unknown") {
            bool saw_space = false, saw_tab = false;
            for (char c : line) {
                if (c == ' ') saw_space = true;
                else if (c == '\t') saw_tab = true;
                else break;
            }
            if (saw_space && saw_tab) return false;
        }
        char quote = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quote != 0) {
                if (c == '\\') ++i;  // skip escaped char
                else if (c == quote) quote = 0;
                continue;
            }
            if (c == '"' || c == '\'') {
                quote = c;
                continue;
            }
            if (hash_comments && c == '#') break;
            if (slash_comments && c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
            switch (c) {
                case '(': ++round; break;
                case ')': if (--round < 0) return false; break;
                case '[': ++square; break;
                case ']': if (--square < 0) return false; break;
                case '{': ++curly; break;
                case '}': if (--curly < 0) return false; break;
                default: break;
            }
        }
    }
    return round == 0 && square == 0 && curly == 0;
}

inline const SyntaxCheckHook& builtin_syntax_check() {
    static const SyntaxCheckHook kHook = [](const DocumentRecord& rec) {
        return bracket_sanity_check(rec.content, rec.language);
    };
    return kHook;
}

struct RepoBuildResult {
    std::vector<RepoDocument> documents;
    std::vector<BrokenEdge> broken_edges;
    std::vector<std::string> dropped_single_file;  // repo ids
};

// Groups records by repo_id, orders each repository dependency-first, and
// concatenates files into one document per repo. Repositories with fewer
// than min_files members are dropped.
inline RepoBuildResult build_repo_documents(const std::vector<DocumentRecord>& records,
                                            std::size_t min_files = 2) {
    std::map<std::string, std::vector<DocumentRecord>> repos;
    for (const auto& rec : records) {
        if (rec.repo_id.empty()) continue;
        repos[rec.repo_id].push_back(rec);
    }
    RepoBuildResult result;
    for (auto& [repo_id, files] : repos) {
        if (files.size() < min_files) {
            result.dropped_single_file.push_back(repo_id);
            continue;
        }
        RepoGraph graph = build_repo_graph(repo_id, files);
        TopoResult topo = topo_order(graph);
        for (auto& edge : topo.broken) result.broken_edges.push_back(std::move(edge));

        std::map<std::string, const DocumentRecord*> by_path;
        for (const auto& f : files) by_path[f.path] = &f;

        RepoDocument doc;
        doc.repo_id = repo_id;
        doc.ordered_paths = topo.order;
        std::map<std::string, std::size_t> language_votes;
        for (const auto& path : topo.order) {
            const DocumentRecord& f = *by_path.at(path);
            ++language_votes[f.language];
            doc.content += file_separator(f.language, path);
            doc.content += f.content;
            if (!f.content.empty() && f.content.back() != '\n') doc.content += "\n";
        }
        std::string best_language = "unknown";
        std::size_t best_votes = 0;
        for (const auto& [lang, votes] : language_votes) {
            if (votes > best_votes) {
                best_votes = votes;
                best_language = lang;
            }
        }
        doc.language = best_language;
        result.documents.push_back(std::move(doc));
    }
    return result;
}

}  // namespace curate
