#include "v2l/corpus/records.hpp"

#include "v2l/corpus/text.hpp"
#include "v2l/error.hpp"
#include "v2l/io.hpp"

namespace v2l::corpus {

std::vector<CaptionRecord> load_captions(const std::filesystem::path& path) {
    std::vector<CaptionRecord> records;
    io::read_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
        CaptionRecord r;
        r.image_id = rec.at("image_id").get<std::string>();
        r.captions = rec.at("captions").get<std::vector<std::string>>();
        if (r.image_id.empty())
            throw DataError(path.string() + ":" + std::to_string(line) + ": empty image_id");
        if (r.captions.empty())
            throw DataError(path.string() + ":" + std::to_string(line) + ": record has no captions");
        records.push_back(std::move(r));
    });
    return records;
}

std::vector<QaRecord> load_qa(const std::filesystem::path& path) {
    std::vector<QaRecord> records;
    io::read_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
        const auto where = path.string() + ":" + std::to_string(line) + ": ";
        QaRecord r;
        r.image_id = rec.at("image_id").get<std::string>();
        r.question = rec.at("question").get<std::string>();
        r.answer = tokenize(rec.at("answer").get<std::string>());
        if (r.question.empty()) throw DataError(where + "empty question");
        if (r.answer.empty()) throw DataError(where + "answer has no tokens");
        if (rec.contains("human_answers") && !rec["human_answers"].is_null())
            r.human_answers = rec["human_answers"].get<std::vector<std::string>>();
        records.push_back(std::move(r));
    });
    return records;
}

void save_captions(const std::filesystem::path& path, const std::vector<CaptionRecord>& records) {
    std::string out;
    for (const auto& r : records)
        out += nlohmann::json{{"image_id", r.image_id}, {"captions", r.captions}}.dump() + "\n";
    io::write_file_atomic(path, out);
}

void save_qa(const std::filesystem::path& path, const std::vector<QaRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        std::string answer;
        for (const auto& t : r.answer) answer += (answer.empty() ? "" : " ") + t;
        nlohmann::json j{{"image_id", r.image_id}, {"question", r.question}, {"answer", answer}};
        if (r.human_answers) j["human_answers"] = *r.human_answers;
        out += j.dump() + "\n";
    }
    io::write_file_atomic(path, out);
}

}  // namespace v2l::corpus
