#include "driveloc/classify.hpp"

#include <algorithm>
#include <cctype>

#include "httplib.h"

#include "driveloc/errors.hpp"
#include "driveloc/rng.hpp"

namespace driveloc {

const std::vector<ActivityClass>& activity_classes() {
    static const std::vector<ActivityClass> classes = {
        {1, "Normal Forward Driving"},
        {2, "Drinking"},
        {3, "Phone Call(right)"},
        {4, "Phone Call(left)"},
        {5, "Eating"},
        {6, "Text (Right)"},
        {7, "Text (Left)"},
        {8, "Reaching behind"},
        {9, "Adjust control panel"},
        {10, "Pick up from floor (Driver)"},
        {11, "Pick up from floor (Passenger)"},
        {12, "Talk to passenger at the right"},
        {13, "Talk to passenger at backseat"},
        {14, "Yawning"},
        {15, "Hand on head"},
        {16, "Singing and dancing with music"},
    };
    return classes;
}

const ActivityClass* class_by_id(int id) {
    if (id < 1 || id > 16) return nullptr;
    return &activity_classes()[static_cast<std::size_t>(id - 1)];
}

const PromptTemplate& prompt_template(int id) {
    static const std::vector<PromptTemplate> templates = {
        {1,
         "Based on the following activities: Normal Forward Driving, Drinking, Phone Call "
         "(right), Phone Call (left), Eating, Text (Right), Text (Left), Reaching behind, "
         "Adjusting control panel, Pick up from floor (Driver), Pick up from floor (Passenger), "
         "Talk to passenger at the right, Talk to passenger at backseat, Yawning, Hand on head, "
         "and Singing or dancing with music, which activity is being performed in the video?"},
        {2,
         "Is the driver simulating any of the following activities? 1. Normal Forward Driving, "
         "2. Pretending to drink a beverage, 3. Simulating a phone call with the right hand, 4. "
         "Simulating a phone call with the left hand, 5. Pretending to eat food, 6. Simulating "
         "texting with the right hand, 7. Simulating texting with the left hand, 8. Pretending "
         "to reach behind the seat, 9. Simulating adjusting the control panel, 10. Pretending to "
         "pick up an object from the floor on the driver's side, 11. Pretending to pick up an "
         "object from the floor on the passenger's side, 12. Simulating talking to a passenger "
         "seated on the right side, 13. Simulating talking to a passenger seated in the "
         "backseat, 14. Simulating yawning, 15. Pretending to place a hand on the head, 16. "
         "Simulating singing or dancing to music. Please provide a 'yes' or 'no' response for "
         "each activity."},
        {3,
         "Is the driver simulating any of the following activities? 1. Normal Forward Driving, "
         "2. Pretending to drink a beverage, 3. Simulating a phone call with the right hand, 4. "
         "Simulating a phone call with the left hand, 5. Pretending to eat food, 6. Simulating "
         "texting with the right hand, 7. Simulating texting with the left hand, 8. Pretending "
         "to reach behind the seat, 9. Simulating adjusting the control panel, 10. Pretending to "
         "pick up an object from the floor on the driver's side, 11. Pretending to pick up an "
         "object from the floor on the passenger's side, 12. Simulating talking to a passenger "
         "seated on the right side, 13. Simulating talking to a passenger seated in the "
         "backseat, 14. Simulating yawning, 15. Pretending to place a hand on the head, 16. "
         "Simulating singing or dancing to music. Please provide the activity the driver is "
         "doing."},
    };
    if (id < 1 || id > kPromptTemplateCount)
        throw ConfigError("prompt template id must be 1..3, got " + std::to_string(id));
    return templates[static_cast<std::size_t>(id - 1)];
}

void to_json(nlohmann::json& j, const ClassificationRequest& r) {
    j = nlohmann::json{
        {"clip", r.clip}, {"start_s", r.start_s}, {"end_s", r.end_s}, {"prompt", r.prompt}};
}

void from_json(const nlohmann::json& j, ClassificationRequest& r) {
    r.clip = j.at("clip").get<std::string>();
    r.start_s = j.at("start_s").get<double>();
    r.end_s = j.at("end_s").get<double>();
    r.prompt = j.at("prompt").get<std::string>();
}

ClassificationRequest build_request(std::string clip_ref, const ActivityInterval& interval,
                                    const PromptTemplate& tmpl) {
    if (interval.start_s >= interval.end_s) throw ConfigError("interval must have start < end");
    ClassificationRequest req;
    req.clip = std::move(clip_ref);
    req.start_s = interval.start_s;
    req.end_s = interval.end_s;
    req.prompt = tmpl.text;
    return req;
}

namespace {

// Lowercase and collapse whitespace runs so phrasing variants like
// "phone  call (right)" still match.
std::string normalize_text(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool last_space = false;
    for (char c : in) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            if (!out.empty() && !last_space) out.push_back(' ');
            last_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(uc)));
            last_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

struct Alias {
    std::string phrase;  // normalized
    int class_id;
};

// Class names plus the paraphrases used by the question templates.
const std::vector<Alias>& alias_table() {
    static const std::vector<Alias> table = [] {
        std::vector<std::pair<std::string, int>> raw = {
            // Question 2/3 paraphrases, items 1..16.
            {"Normal Forward Driving", 1},
            {"Pretending to drink a beverage", 2},
            {"Simulating a phone call with the right hand", 3},
            {"Simulating a phone call with the left hand", 4},
            {"Pretending to eat food", 5},
            {"Simulating texting with the right hand", 6},
            {"Simulating texting with the left hand", 7},
            {"Pretending to reach behind the seat", 8},
            {"Simulating adjusting the control panel", 9},
            {"Pretending to pick up an object from the floor on the driver's side", 10},
            {"Pretending to pick up an object from the floor on the passenger's side", 11},
            {"Simulating talking to a passenger seated on the right side", 12},
            {"Simulating talking to a passenger seated in the backseat", 13},
            {"Simulating yawning", 14},
            {"Pretending to place a hand on the head", 15},
            {"Simulating singing or dancing to music", 16},
            // Question 1 naming variants.
            {"Phone Call (right)", 3},
            {"Phone Call (left)", 4},
            {"Adjusting control panel", 9},
            {"Singing or dancing with music", 16},
        };
        std::vector<Alias> aliases;
        for (const auto& cls : activity_classes())
            aliases.push_back({normalize_text(cls.name), cls.id});
        for (const auto& [phrase, id] : raw) aliases.push_back({normalize_text(phrase), id});
        // Longest first, so position ties resolve to the longest phrase.
        std::stable_sort(aliases.begin(), aliases.end(), [](const Alias& a, const Alias& b) {
            return a.phrase.size() > b.phrase.size();
        });
        return aliases;
    }();
    return table;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// First word-boundary-delimited occurrence of phrase in text, or npos.
std::size_t find_bounded(const std::string& text, const std::string& phrase) {
    std::size_t from = 0;
    while (true) {
        std::size_t at = text.find(phrase, from);
        if (at == std::string::npos) return std::string::npos;
        bool left_ok = at == 0 || !word_char(text[at - 1]) || !word_char(phrase.front());
        std::size_t end = at + phrase.size();
        bool right_ok = end == text.size() || !word_char(text[end]) || !word_char(phrase.back());
        if (left_ok && right_ok) return at;
        from = at + 1;
    }
}

}  // namespace

ClassOutcome parse_answer(std::string_view answer) {
    const std::string text = normalize_text(answer);
    std::size_t best_pos = std::string::npos;
    int best_id = 0;
    for (const Alias& alias : alias_table()) {
        std::size_t at = find_bounded(text, alias.phrase);
        if (at < best_pos) {  // aliases are longest-first, so '<' keeps the
                              // longest phrase on position ties
            best_pos = at;
            best_id = alias.class_id;
        }
    }
    ClassOutcome out;
    if (best_id != 0) out.cls = *class_by_id(best_id);
    return out;  // no mention (including plain "no") -> NoActivity
}

MockClassifier::MockClassifier(std::vector<GroundTruth> truths, double error_rate,
                               std::uint64_t seed)
    : error_rate_(error_rate), seed_(seed) {
    if (error_rate < 0 || error_rate > 1) throw ConfigError("error_rate must lie in [0, 1]");
    for (auto& gt : truths) truths_[gt.video_id] = std::move(gt);
}

ClassOutcome MockClassifier::classify(const ClassificationRequest& request) {
    const GroundTruth* gt = nullptr;
    if (auto it = truths_.find(request.clip); it != truths_.end()) gt = &it->second;

    int true_class = 0;
    double best_overlap = 0;
    if (gt) {
        for (const auto& act : gt->activities) {
            double ov = std::min(act.end_s, request.end_s) - std::max(act.start_s, request.start_s);
            if (ov > best_overlap) {
                best_overlap = ov;
                true_class = act.class_id;
            }
        }
    }
    ClassOutcome out;
    if (true_class == 0) return out;  // nothing overlaps -> NoActivity

    // Deterministic per (request, seed): the stream is keyed by the request
    // content, so call order and concurrency do not matter.
    Rng rng(mix_seed(mix_seed(seed_, hash_string(request.clip)),
                     static_cast<std::uint64_t>(std::llround(request.start_s * 1000.0)) ^
                         (static_cast<std::uint64_t>(std::llround(request.end_s * 1000.0)) << 20)));
    int answer_class = true_class;
    if (rng.uniform01() < error_rate_) {
        int wrong = 1 + static_cast<int>(rng.below(15));  // 15 wrong choices
        if (wrong >= true_class) ++wrong;
        answer_class = wrong;
    }
    out.cls = *class_by_id(answer_class);
    return out;
}

HttpClassifier::HttpClassifier(HttpClassifierOptions opts) : opts_(std::move(opts)) {
    if (opts_.retries < 0) throw ConfigError("retries must be >= 0");
    if (opts_.timeout_s <= 0) throw ConfigError("timeout must be positive");
}

ClassOutcome HttpClassifier::classify(const ClassificationRequest& request) {
    nlohmann::json body = request;
    const std::string payload = body.dump();

    std::string failure;
    for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
        httplib::Client client(opts_.host, opts_.port);
        const auto seconds = static_cast<time_t>(opts_.timeout_s);
        const auto usec = static_cast<time_t>((opts_.timeout_s - static_cast<double>(seconds)) * 1e6);
        client.set_connection_timeout(seconds, usec);
        client.set_read_timeout(seconds, usec);
        client.set_write_timeout(seconds, usec);

        auto res = client.Post(opts_.path, payload, "application/json");
        if (!res) {
            failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            failure = "http status " + std::to_string(res->status);
            continue;
        }
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("answer")) {
            failure = "malformed response body";
            continue;
        }
        return parse_answer(reply["answer"].get<std::string>());
    }

    ClassOutcome out;
    out.error = failure.empty() ? "classifier unreachable" : failure;
    return out;
}

std::vector<ActivityInterval> classify_intervals(std::vector<ActivityInterval> proposals,
                                                 Classifier& classifier, int template_id,
                                                 const std::string& clip_ref) {
    const PromptTemplate& tmpl = prompt_template(template_id);
    std::sort(proposals.begin(), proposals.end(),
              [](const ActivityInterval& a, const ActivityInterval& b) {
                  if (a.start_s != b.start_s) return a.start_s < b.start_s;
                  return a.end_s < b.end_s;
              });
    for (auto& iv : proposals) {
        ClassificationRequest req =
            build_request(clip_ref.empty() ? iv.video_id : clip_ref, iv, tmpl);
        ClassOutcome outcome = classifier.classify(req);
        if (outcome.cls) {
            iv.class_id = outcome.cls->id;
            iv.label = outcome.cls->name;
        } else {
            iv.class_id.reset();
            iv.label.clear();
        }
        iv.error = outcome.error;
    }
    return proposals;
}

}  // namespace driveloc
