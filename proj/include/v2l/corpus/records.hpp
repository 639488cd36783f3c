#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace v2l::corpus {

struct CaptionRecord {
    std::string image_id;
    std::vector<std::string> captions;
};

struct QaRecord {
    std::string image_id;
    std::string question;
    std::vector<std::string> answer;  ///< tokenized
    std::optional<std::vector<std::string>> human_answers;
};

/// One JSON object per line: {"image_id": ..., "captions": [...]}.
std::vector<CaptionRecord> load_captions(const std::filesystem::path& path);

/// One JSON object per line: {"image_id", "question", "answer", "human_answers"?}.
std::vector<QaRecord> load_qa(const std::filesystem::path& path);

void save_captions(const std::filesystem::path& path, const std::vector<CaptionRecord>& records);
void save_qa(const std::filesystem::path& path, const std::vector<QaRecord>& records);

}  // namespace v2l::corpus
