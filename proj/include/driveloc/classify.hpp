#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "driveloc/evaluate.hpp"
#include "driveloc/types.hpp"

namespace driveloc {

// The 16 driver activity classes.
struct ActivityClass {
    int id = 0;
    std::string name;
};

const std::vector<ActivityClass>& activity_classes();
const ActivityClass* class_by_id(int id);  // nullptr if id is not 1..16

// The three question templates used for video question answering. Template 3
// is the default.
struct PromptTemplate {
    int id = 0;
    std::string text;
};

inline constexpr int kPromptTemplateCount = 3;
inline constexpr int kDefaultPromptTemplate = 3;

// Throws ConfigError unless 1 <= id <= 3.
const PromptTemplate& prompt_template(int id);

// Wire request for the external classifier service:
// {"clip": string, "start_s": number, "end_s": number, "prompt": string}.
struct ClassificationRequest {
    std::string clip;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string prompt;

    bool operator==(const ClassificationRequest&) const = default;
};

void to_json(nlohmann::json& j, const ClassificationRequest& r);
void from_json(const nlohmann::json& j, ClassificationRequest& r);

ClassificationRequest build_request(std::string clip_ref, const ActivityInterval& interval,
                                    const PromptTemplate& tmpl);

// Either a class or "no activity". error carries a transport failure note
// when the external service could not be reached.
struct ClassOutcome {
    std::optional<ActivityClass> cls;
    std::string error;

    bool no_activity() const { return !cls.has_value(); }
};

// Maps free-text answers to classes: case-insensitive, word-boundary-aware
// search over the class names and their question paraphrases; the earliest
// mention wins (longest phrase on position ties). No mention means NoActivity,
// which also covers plain "no" answers.
ClassOutcome parse_answer(std::string_view answer);

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual ClassOutcome classify(const ClassificationRequest& request) = 0;
};

// Test double: answers with the ground-truth class of the annotation that
// overlaps the request interval most, flipped to a uniformly random wrong
// class with probability error_rate. Deterministic per (request, seed): the
// random stream is keyed by the request content, not call order.
class MockClassifier : public Classifier {
public:
    MockClassifier(std::vector<GroundTruth> truths, double error_rate, std::uint64_t seed);
    ClassOutcome classify(const ClassificationRequest& request) override;

private:
    std::map<std::string, GroundTruth> truths_;
    double error_rate_;
    std::uint64_t seed_;
};

struct HttpClassifierOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/classify";
    double timeout_s = 30.0;
    int retries = 1;  // additional attempts after a failure
};

// POSTs the JSON request to the service and parses {"answer": string} through
// parse_answer(). Transport failures degrade to NoActivity with the error
// field set; they never throw.
class HttpClassifier : public Classifier {
public:
    explicit HttpClassifier(HttpClassifierOptions opts);
    ClassOutcome classify(const ClassificationRequest& request) override;

private:
    HttpClassifierOptions opts_;
};

// Classifies every proposal with the given template, writing class_id/label
// (or the error annotation) into a copy. Results are ordered by start time.
// clip_ref overrides the per-interval video_id as the clip reference when
// non-empty.
std::vector<ActivityInterval> classify_intervals(std::vector<ActivityInterval> proposals,
                                                 Classifier& classifier, int template_id,
                                                 const std::string& clip_ref = "");

}  // namespace driveloc
