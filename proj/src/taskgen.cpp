#include "utr/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "utr/json_util.hpp"
#include "utr/rng.hpp"

namespace utr {

using json_util::Json;
using json_util::OrderedJson;

const char* to_string(AttributeKind k) noexcept {
    switch (k) {
        case AttributeKind::Location: return "location";
        case AttributeKind::Appearance: return "appearance";
        case AttributeKind::Action: return "action";
    }
    return "unknown";
}

const char* to_string(QueryDirection d) noexcept {
    return d == QueryDirection::SpatialToTemporal ? "spatial_to_temporal" : "temporal_to_spatial";
}

AttributeKind parse_attribute_kind(std::string_view s) {
    if (s == "location") return AttributeKind::Location;
    if (s == "appearance") return AttributeKind::Appearance;
    if (s == "action") return AttributeKind::Action;
    throw Error("unknown attribute kind '" + std::string(s) + "'");
}

QueryDirection parse_direction(std::string_view s) {
    if (s == "spatial_to_temporal") return QueryDirection::SpatialToTemporal;
    if (s == "temporal_to_spatial") return QueryDirection::TemporalToSpatial;
    throw Error("unknown query direction '" + std::string(s) + "'");
}

int ClipContext::position_of(std::int64_t frame_index) const {
    const auto& idx = clip.frame_indices;
    auto it = std::lower_bound(idx.begin(), idx.end(), frame_index);
    if (it == idx.end() || *it != frame_index) return 0;
    return static_cast<int>(it - idx.begin()) + 1;
}

void QueryConfig::validate() const {
    if (max_subjects < 1) throw ConfigError("taskgen max_subjects must be >= 1");
    if (max_query_frames < 1) throw ConfigError("taskgen max_query_frames must be >= 1");
    if (weight_location < 0 || weight_appearance < 0 || weight_action < 0) {
        throw ConfigError("taskgen kind weights must be non-negative");
    }
    auto prob = [](double p) { return p >= 0 && p <= 1; };
    if (!prob(extra_kind_probability) || !prob(temporal_to_spatial_probability)) {
        throw ConfigError("taskgen probabilities must lie in [0,1]");
    }
}

namespace {

std::vector<const SubjectTrajectory*> sorted_by_id(const std::vector<SubjectTrajectory>& tracks) {
    std::vector<const SubjectTrajectory*> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(&t);
    std::sort(out.begin(), out.end(),
              [](const auto* a, const auto* b) { return a->subject_id < b->subject_id; });
    return out;
}

const SubjectTrajectory& find_subject(const std::vector<SubjectTrajectory>& tracks, int id) {
    for (const auto& t : tracks)
        if (t.subject_id == id) return t;
    throw Error("queried subject " + std::to_string(id) + " missing from tracks");
}

/// Entry of `t` at 1-based clip position `pos`, or nullptr.
const TrackEntry* entry_at_position(const SubjectTrajectory& t, const ClipContext& ctx, int pos) {
    if (pos < 1 || pos > static_cast<int>(ctx.clip.frame_indices.size())) return nullptr;
    return t.entry_at(ctx.clip.frame_indices[static_cast<std::size_t>(pos - 1)]);
}

std::set<int> positions_of(const SubjectTrajectory& t, const ClipContext& ctx) {
    std::set<int> out;
    for (const auto& e : t.entries) {
        const int p = ctx.position_of(e.frame_index);
        if (p == 0) {
            throw Error("subject " + std::to_string(t.subject_id) + " has frame " +
                        std::to_string(e.frame_index) + " outside clip '" + ctx.clip.clip_id + "'");
        }
        out.insert(p);
    }
    return out;
}

bool attribute_present(const std::vector<const SubjectTrajectory*>& subjects, const ClipContext& ctx,
                       const std::vector<int>& frames, AttributeKind kind) {
    if (kind == AttributeKind::Location) return true;
    for (const auto* t : subjects) {
        for (int p : frames) {
            const TrackEntry* e = entry_at_position(*t, ctx, p);
            if (!e) return false;
            const std::string& v = kind == AttributeKind::Appearance ? e->caption : e->action;
            if (v.empty()) return false;
        }
    }
    return true;
}

bool valid_category(std::string_view c) {
    return !c.empty() && c.find_first_of("<>,;:[]") == std::string_view::npos;
}

std::string strip_angles(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '<' || c == '>'; }), s.end());
    return s;
}

bool has_kind(const QuerySpec& q, AttributeKind k) {
    return std::find(q.attribute_kinds.begin(), q.attribute_kinds.end(), k) != q.attribute_kinds.end();
}

/// Natural-language part of the answer, naming each queried subject's
/// appearance and action at its first query frame.
std::string answer_sentence(const std::vector<SubjectTrajectory>& tracks, const ClipContext& ctx,
                            const QuerySpec& query) {
    const bool appearance = has_kind(query, AttributeKind::Appearance);
    const bool action = has_kind(query, AttributeKind::Action);
    if (!appearance && !action) return {};
    std::string out;
    for (int id : query.subject_ids) {
        const SubjectTrajectory& t = find_subject(tracks, id);
        const TrackEntry* e = nullptr;
        int at = 0;
        for (int p : query.query_frames) {
            if ((e = entry_at_position(t, ctx, p))) {
                at = p;
                break;
            }
        }
        std::string desc;
        if (e && appearance && !e->caption.empty()) desc = e->caption;
        if (e && action && !e->action.empty()) desc += (desc.empty() ? "" : ", ") + e->action;
        if (!out.empty()) out += "; ";
        out += (out.empty() ? "Subject " : "subject ") + std::to_string(id) + " is the " + t.category;
        if (!desc.empty()) out += " (" + desc + ")";
        if (at > 0) out += " at Frame" + std::to_string(at);
    }
    return strip_angles(out);
}

}  // namespace

std::optional<QuerySpec> sample_query(const std::vector<SubjectTrajectory>& tracks,
                                      const ClipContext& ctx, const QueryConfig& config,
                                      std::uint64_t seed) {
    config.validate();
    if (tracks.empty()) return std::nullopt;
    const auto subjects = sorted_by_id(tracks);
    Rng rng(seed);

    const auto n = subjects.size();
    const auto k = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(std::min<std::size_t>(config.max_subjects, n))));
    std::vector<std::size_t> chosen = rng.sample_without_replacement(n, k);

    std::vector<int> common;
    for (;;) {
        std::set<int> acc = positions_of(*subjects[chosen[0]], ctx);
        for (std::size_t i = 1; i < chosen.size(); ++i) {
            const std::set<int> other = positions_of(*subjects[chosen[i]], ctx);
            std::set<int> both;
            std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(),
                                  std::inserter(both, both.end()));
            acc = std::move(both);
        }
        if (!acc.empty() || chosen.size() == 1) {
            common.assign(acc.begin(), acc.end());
            break;
        }
        chosen.pop_back();
    }
    if (common.empty()) {
        throw Error("subject " + std::to_string(subjects[chosen[0]]->subject_id) + " has no entries");
    }

    QuerySpec q;
    q.clip_id = ctx.clip.clip_id;
    q.seed = seed;
    std::vector<const SubjectTrajectory*> picked;
    for (auto i : chosen) {
        picked.push_back(subjects[i]);
        q.subject_ids.push_back(subjects[i]->subject_id);
    }
    std::sort(q.subject_ids.begin(), q.subject_ids.end());

    const auto m = static_cast<std::size_t>(rng.uniform_int(
        1, static_cast<std::int64_t>(std::min<std::size_t>(config.max_query_frames, common.size()))));
    for (auto i : rng.sample_without_replacement(common.size(), m)) q.query_frames.push_back(common[i]);
    std::sort(q.query_frames.begin(), q.query_frames.end());

    const std::pair<AttributeKind, double> weighted[] = {
        {AttributeKind::Location, config.weight_location},
        {AttributeKind::Appearance, config.weight_appearance},
        {AttributeKind::Action, config.weight_action},
    };
    std::vector<std::pair<AttributeKind, double>> present;
    double total = 0;
    for (const auto& [kind, w] : weighted) {
        if (w > 0 && attribute_present(picked, ctx, q.query_frames, kind)) {
            present.emplace_back(kind, w);
            total += w;
        }
    }
    AttributeKind primary = AttributeKind::Location;
    if (!present.empty()) {
        double u = rng.uniform01() * total;
        primary = present.back().first;
        for (const auto& [kind, w] : present) {
            if (u < w) {
                primary = kind;
                break;
            }
            u -= w;
        }
    }
    for (const auto& [kind, w] : present) {
        if (kind == primary || rng.bernoulli(config.extra_kind_probability)) q.attribute_kinds.push_back(kind);
    }
    if (q.attribute_kinds.empty()) q.attribute_kinds.push_back(primary);

    q.direction = rng.bernoulli(config.temporal_to_spatial_probability) ? QueryDirection::TemporalToSpatial
                                                                        : QueryDirection::SpatialToTemporal;
    return q;
}

// ---------------------------------------------------------------------------

NormalizedBox normalize_box(const BoundingBox& box, int width, int height) {
    auto norm = [](double v, int dim) {
        const double scaled = std::floor(v * 1000.0 / dim + 0.5);
        return static_cast<int>(std::clamp(scaled, 0.0, 1000.0));
    };
    return {norm(box.x1, width), norm(box.y1, height), norm(box.x2, width), norm(box.y2, height)};
}

std::string serialize_box(const BoundingBox& box, int width, int height) {
    const NormalizedBox n = normalize_box(box, width, height);
    return "[" + std::to_string(n.x1) + "," + std::to_string(n.y1) + "," + std::to_string(n.x2) + "," +
           std::to_string(n.y2) + "]";
}

std::string render_answer(const std::vector<SubjectTrajectory>& tracks, const ClipContext& ctx,
                          const QuerySpec& query) {
    std::string out = answer_sentence(tracks, ctx, query);
    if (!out.empty()) out += ", ";
    std::vector<int> ids = query.subject_ids;
    std::sort(ids.begin(), ids.end());
    bool first_block = true;
    for (int id : ids) {
        const SubjectTrajectory& t = find_subject(tracks, id);
        if (!valid_category(t.category)) {
            throw Error("category '" + t.category + "' cannot be rendered in an answer");
        }
        if (t.entries.empty()) throw Error("subject " + std::to_string(id) + " has no entries");
        if (!first_block) out += ", ";
        first_block = false;
        const std::string tag = "id" + std::to_string(id);
        out += t.category + "<" + tag + ">";
        bool first_frame = true;
        for (int p : positions_of(t, ctx)) {
            const TrackEntry* e = entry_at_position(t, ctx, p);
            if (!first_frame) out += ";";
            first_frame = false;
            out += "Frame" + std::to_string(p) + ":<box>" + serialize_box(e->box, ctx.width, ctx.height) +
                   "</box>";
        }
        out += "</" + tag + ">";
    }
    return out;
}

std::vector<ParsedSubject> answer_projection(const std::vector<SubjectTrajectory>& tracks,
                                             const ClipContext& ctx, const QuerySpec& query) {
    std::vector<int> ids = query.subject_ids;
    std::sort(ids.begin(), ids.end());
    std::vector<ParsedSubject> out;
    for (int id : ids) {
        const SubjectTrajectory& t = find_subject(tracks, id);
        ParsedSubject s{t.category, id, {}};
        for (const auto& e : t.entries) {
            s.frames[ctx.position_of(e.frame_index)] = normalize_box(e.box, ctx.width, ctx.height);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class AnswerParser {
public:
    explicit AnswerParser(std::string_view s) : s_(s) {}

    ParsedAnswer run() {
        ParsedAnswer out;
        const std::size_t first_tag = s_.find('<');
        if (first_tag == std::string_view::npos) fail(0, "no subject block");
        const std::size_t sep = s_.substr(0, first_tag).rfind(", ");
        if (sep != std::string_view::npos) {
            if (sep == 0) fail(0, "empty answer sentence before subject blocks");
            out.prefix = std::string(s_.substr(0, sep));
            pos_ = sep + 2;
        }
        int last_id = 0;
        for (;;) {
            ParsedSubject subject = block();
            if (subject.subject_id <= last_id) {
                fail(pos_, subject.subject_id == last_id ? "duplicate subject id" : "subject ids not ascending");
            }
            last_id = subject.subject_id;
            out.subjects.push_back(std::move(subject));
            if (pos_ == s_.size()) break;
            if (s_.substr(pos_, 2) != ", ") fail(pos_, "unexpected trailing text");
            pos_ += 2;
        }
        return out;
    }

private:
    [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw GrammarError(at, what); }

    void expect(std::string_view lit) {
        if (s_.substr(pos_, lit.size()) != lit) fail(pos_, "expected '" + std::string(lit) + "'");
        pos_ += lit.size();
    }

    /// Decimal without leading zeros.
    int number(int max_value) {
        const std::size_t start = pos_;
        long long v = 0;
        while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') {
            v = v * 10 + (s_[pos_] - '0');
            if (v > max_value) fail(start, "number out of range");
            ++pos_;
        }
        if (pos_ == start) fail(start, "expected a number");
        if (s_[start] == '0' && pos_ - start > 1) fail(start, "leading zero");
        return static_cast<int>(v);
    }

    int positive(int max_value) {
        const std::size_t start = pos_;
        const int v = number(max_value);
        if (v == 0) fail(start, "expected a positive number");
        return v;
    }

    ParsedSubject block() {
        const std::size_t start = pos_;
        const std::size_t lt = s_.find('<', pos_);
        if (lt == std::string_view::npos) fail(pos_, "expected a subject block");
        ParsedSubject subject;
        subject.category = std::string(s_.substr(pos_, lt - pos_));
        if (!valid_category(subject.category)) fail(start, "invalid category");
        pos_ = lt;
        expect("<id");
        subject.subject_id = positive(1'000'000'000);
        expect(">");
        if (s_.substr(pos_, 2) == "</") fail(pos_, "empty trajectory");
        int last_frame = 0;
        for (;;) {
            expect("Frame");
            const std::size_t frame_at = pos_;
            const int p = positive(1'000'000'000);
            if (p <= last_frame) fail(frame_at, "frame positions not ascending");
            last_frame = p;
            expect(":<box>[");
            NormalizedBox b;
            b.x1 = number(1000);
            expect(",");
            b.y1 = number(1000);
            expect(",");
            b.x2 = number(1000);
            expect(",");
            b.y2 = number(1000);
            expect("]</box>");
            subject.frames.emplace(p, b);
            if (pos_ < s_.size() && s_[pos_] == ';') {
                ++pos_;
                continue;
            }
            break;
        }
        expect("</id");
        const std::size_t close_at = pos_;
        if (positive(1'000'000'000) != subject.subject_id) fail(close_at, "closing tag does not match");
        expect(">");
        return subject;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

ParsedAnswer parse_answer(std::string_view answer) { return AnswerParser(answer).run(); }

// ---------------------------------------------------------------------------

void TemplateSet::validate() const {
    for (auto kind : {AttributeKind::Location, AttributeKind::Appearance, AttributeKind::Action}) {
        auto it = cues.find(kind);
        if (it == cues.end() || it->second.empty()) {
            throw ConfigError(std::string("template set has no cue for kind '") + to_string(kind) + "'");
        }
    }
    for (auto d : {QueryDirection::SpatialToTemporal, QueryDirection::TemporalToSpatial}) {
        auto it = questions.find(d);
        if (it == questions.end() || it->second.empty()) {
            throw ConfigError(std::string("template set has no question for '") + to_string(d) + "'");
        }
    }
}

TemplateSet default_templates() {
    TemplateSet t;
    t.system_prompt =
        "You are given a video. Answer with the category, identity and per-frame bounding box of "
        "every requested subject, using boxes normalized to [0,1000].";
    t.cues[AttributeKind::Location] = {
        "the {category} located at {box} in Frame{frame}",
        "the {category} whose box in Frame{frame} is {box}",
    };
    t.cues[AttributeKind::Appearance] = {
        "the {category} that looks like {caption} in Frame{frame}",
        "{caption} (a {category}) seen in Frame{frame}",
    };
    t.cues[AttributeKind::Action] = {
        "the {category} that is {action} in Frame{frame}",
        "the {category} caught {action} in Frame{frame}",
    };
    t.questions[QueryDirection::SpatialToTemporal] = {
        "Track {cues} through the whole video and give its location in every frame.",
        "Starting from {cues}, follow each subject across all frames and output its trajectory.",
    };
    t.questions[QueryDirection::TemporalToSpatial] = {
        "Look at {frames}. Find {cues}, then output the full trajectory of each subject.",
        "Which subjects appear in {frames} as {cues}? Give their boxes in every frame of the video.",
    };
    return t;
}

TemplateSet parse_templates(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("templates: malformed JSON: ") + e.what());
    }
    TemplateSet t;
    try {
        t.system_prompt = j.at("system_prompt").get<std::string>();
        for (const auto& [name, list] : j.at("cues").items()) {
            t.cues[parse_attribute_kind(name)] = list.get<std::vector<std::string>>();
        }
        for (const auto& [name, list] : j.at("questions").items()) {
            t.questions[parse_direction(name)] = list.get<std::vector<std::string>>();
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("templates: ") + e.what());
    }
    t.validate();
    return t;
}

std::string serialize_templates(const TemplateSet& t) {
    OrderedJson cues = OrderedJson::object();
    for (const auto& [k, v] : t.cues) cues[to_string(k)] = v;
    OrderedJson questions = OrderedJson::object();
    for (const auto& [d, v] : t.questions) questions[to_string(d)] = v;
    OrderedJson j{{"system_prompt", t.system_prompt}, {"cues", cues}, {"questions", questions}};
    return j.dump(2);
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const std::size_t open = tmpl.find('{', i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const std::size_t close = tmpl.find('}', open);
        if (close == std::string_view::npos) throw Error("unterminated placeholder in template");
        out.append(tmpl.substr(i, open - i));
        const std::string name(tmpl.substr(open + 1, close - open - 1));
        auto it = values.find(name);
        if (it == values.end() || it->second.empty()) {
            throw Error("template placeholder {" + name + "} left unfilled");
        }
        out += it->second;
        i = close + 1;
    }
    return out;
}

ConversationRecord build_conversation(const std::vector<SubjectTrajectory>& tracks,
                                      const ClipContext& ctx, const QuerySpec& query,
                                      const TemplateSet& templates, const std::string& id) {
    templates.validate();
    Rng rng(derive_seed(query.seed, "build_conversation", id));
    auto pick = [&](const std::vector<std::string>& pool) -> const std::string& {
        return pool[rng.index(pool.size())];
    };

    std::string cues;
    for (int sid : query.subject_ids) {
        const SubjectTrajectory& t = find_subject(tracks, sid);
        for (int p : query.query_frames) {
            const TrackEntry* e = entry_at_position(t, ctx, p);
            if (!e) {
                throw Error("subject " + std::to_string(sid) + " absent at query frame " + std::to_string(p));
            }
            for (AttributeKind kind : query.attribute_kinds) {
                const std::map<std::string, std::string> values{
                    {"category", t.category},
                    {"frame", std::to_string(p)},
                    {"box", serialize_box(e->box, ctx.width, ctx.height)},
                    {"caption", e->caption},
                    {"action", e->action},
                };
                if (!cues.empty()) cues += "; ";
                cues += fill_template(pick(templates.cues.at(kind)), values);
            }
        }
    }
    std::string frames;
    for (int p : query.query_frames) frames += (frames.empty() ? "Frame" : ", Frame") + std::to_string(p);

    ConversationRecord r;
    r.id = id;
    r.video_id = ctx.clip.video_id;
    r.clip_frames = ctx.clip.frame_indices;
    r.system_prompt = templates.system_prompt;
    r.question = fill_template(pick(templates.questions.at(query.direction)), {{"cues", cues}, {"frames", frames}});
    r.answer = render_answer(tracks, ctx, query);
    r.query = query;
    r.seed = query.seed;
    return r;
}

void verify_conversation(const ConversationRecord& record, const std::vector<SubjectTrajectory>& tracks,
                         const ClipContext& ctx) {
    const ParsedAnswer parsed = parse_answer(record.answer);
    if (parsed.subjects != answer_projection(tracks, ctx, record.query)) {
        throw Error("record " + record.id + ": answer does not match the queried trajectories");
    }
}

std::string serialize_conversation(const ConversationRecord& r) {
    std::vector<std::string> kinds;
    for (auto k : r.query.attribute_kinds) kinds.emplace_back(to_string(k));
    OrderedJson query{{"clip_id", r.query.clip_id},
                      {"subject_ids", r.query.subject_ids},
                      {"query_frames", r.query.query_frames},
                      {"attribute_kinds", kinds},
                      {"direction", to_string(r.query.direction)}};
    OrderedJson j{{"id", r.id},
                  {"video_id", r.video_id},
                  {"clip_frames", r.clip_frames},
                  {"system", r.system_prompt},
                  {"question", r.question},
                  {"answer", r.answer},
                  {"query", query},
                  {"seed", r.seed}};
    return j.dump();
}

ConversationRecord parse_conversation_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    ConversationRecord r;
    try {
        r.id = json_util::get_string(j, "id", line);
        r.video_id = json_util::get_string(j, "video_id", line);
        r.clip_frames = json_util::require(j, "clip_frames", line).get<std::vector<std::int64_t>>();
        r.system_prompt = json_util::get_string(j, "system", line);
        r.question = json_util::get_string(j, "question", line);
        r.answer = json_util::get_string(j, "answer", line);
        const Json& q = json_util::require(j, "query", line);
        r.query.clip_id = json_util::get_string(q, "clip_id", line);
        r.query.subject_ids = json_util::require(q, "subject_ids", line).get<std::vector<int>>();
        r.query.query_frames = json_util::require(q, "query_frames", line).get<std::vector<int>>();
        for (const auto& k : json_util::require(q, "attribute_kinds", line)) {
            r.query.attribute_kinds.push_back(parse_attribute_kind(k.get<std::string>()));
        }
        r.query.direction = parse_direction(json_util::get_string(q, "direction", line));
        r.seed = json_util::require(j, "seed", line).get<std::uint64_t>();
        r.query.seed = r.seed;
    } catch (const Json::exception& e) {
        throw ParseError(line, "", e.what());
    }
    return r;
}

// ---------------------------------------------------------------------------

KeyframePolicy parse_keyframe_policy(std::string_view s) {
    if (s == "last") return KeyframePolicy::Last;
    if (s == "random") return KeyframePolicy::Random;
    throw ConfigError("unknown keyframe policy '" + std::string(s) + "'");
}

const char* to_string(KeyframePolicy p) noexcept { return p == KeyframePolicy::Last ? "last" : "random"; }

namespace {

std::string describe_frame(const std::vector<const SubjectTrajectory*>& subjects, const ClipContext& ctx,
                           int pos) {
    std::string out = "Frame" + std::to_string(pos) + ":";
    bool any = false;
    for (const auto* t : subjects) {
        const TrackEntry* e = entry_at_position(*t, ctx, pos);
        if (!e) continue;
        out += (any ? "; " : " ") + t->category + " " + std::to_string(t->subject_id);
        if (!e->caption.empty()) out += ", " + e->caption;
        if (!e->action.empty()) out += ", " + e->action;
        any = true;
    }
    if (!any) out += " nothing";
    return out;
}

}  // namespace

int scoring_keyframe(const ConversationRecord& record, KeyframePolicy policy) {
    const auto count = record.clip_frames.size();
    if (count == 0) throw Error("record '" + record.id + "' has no clip frames");
    if (policy == KeyframePolicy::Last) return static_cast<int>(count);
    Rng rng(derive_seed(record.seed, "keyframe", record.id));
    return 1 + static_cast<int>(rng.index(count));
}

ScoringJob make_scoring_job(const ConversationRecord& record, const std::vector<SubjectTrajectory>& tracks,
                            const ClipContext& ctx, KeyframePolicy policy) {
    const auto subjects = sorted_by_id(tracks);
    const int count = static_cast<int>(ctx.clip.frame_indices.size());
    if (count == 0) throw Error("clip '" + ctx.clip.clip_id + "' has no frames");
    ScoringJob job;
    job.sample_id = record.id;
    job.target = record.answer;
    for (int p = 1; p <= count; ++p) {
        if (p > 1) job.context_full += "\n";
        job.context_full += describe_frame(subjects, ctx, p);
    }
    job.keyframe = scoring_keyframe(record, policy);
    job.context_single = describe_frame(subjects, ctx, job.keyframe);
    return job;
}

std::string serialize_scoring_job(const ScoringJob& job) {
    OrderedJson j{{"sample_id", job.sample_id},
                  {"target", job.target},
                  {"context_full", job.context_full},
                  {"context_single", job.context_single},
                  {"keyframe", job.keyframe}};
    return j.dump();
}

}  // namespace utr
