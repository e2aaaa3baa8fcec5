#include "io/shrec.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace ddnet {

namespace {

constexpr std::array<const char*, 14> kGestureNames = {
    "Grab",    "Tap",        "Expand",      "Pinch",      "Rotation CW", "Rotation CCW", "Swipe Right",
    "Swipe Left", "Swipe Up", "Swipe Down", "Swipe X",    "Swipe +",     "Swipe V",      "Shake",
};

struct IndexRow {
    int gesture, finger, subject, essai, label14, label28, size;
    std::size_t line;
};

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line); }

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
        const std::size_t start = i;
        while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view token, const std::string& path, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    require(ec == std::errc() && ptr == token.data() + token.size(), ErrorCode::Parse,
            where(path, line) + ": not a number: '" + std::string(token) + "'");
    return value;
}

std::vector<IndexRow> read_index(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "missing SHREC index file " + path);
    std::vector<IndexRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        require(tokens.size() == 7, ErrorCode::Parse,
                where(path, lineno) + ": expected 7 columns (gesture finger subject essai label_14 label_28 size), got " +
                    std::to_string(tokens.size()));
        std::array<int, 7> v{};
        for (std::size_t i = 0; i < 7; ++i) v[i] = parse_number<int>(tokens[i], path, lineno);
        require(v[0] >= 1 && v[0] <= 14, ErrorCode::Parse, where(path, lineno) + ": gesture id out of range");
        require(v[1] == 1 || v[1] == 2, ErrorCode::Parse, where(path, lineno) + ": finger id must be 1 or 2");
        require(v[4] >= 1 && v[4] <= 14, ErrorCode::Parse, where(path, lineno) + ": 14-class label out of range");
        require(v[5] >= 1 && v[5] <= 28, ErrorCode::Parse, where(path, lineno) + ": 28-class label out of range");
        rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], lineno});
    }
    return rows;
}

std::string sample_dir(const std::string& root, const IndexRow& r) {
    std::ostringstream os;
    os << root << "/gesture_" << r.gesture << "/finger_" << r.finger << "/subject_" << r.subject << "/essai_"
       << r.essai;
    return os.str();
}

std::string sample_id(const IndexRow& r) {
    std::ostringstream os;
    os << "g" << r.gesture << "_f" << r.finger << "_s" << r.subject << "_e" << r.essai;
    return os.str();
}

}  // namespace

SkeletonSequence parse_shrec_skeleton_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "missing skeleton file " + path);
    std::vector<float> coords;
    std::string line;
    std::size_t lineno = 0;
    std::size_t frames = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        require(tokens.size() == kShrecJoints * 3, ErrorCode::Parse,
                where(path, lineno) + ": expected " + std::to_string(kShrecJoints * 3) + " values (22 joints x 3), got " +
                    std::to_string(tokens.size()));
        for (auto tok : tokens) coords.push_back(parse_number<float>(tok, path, lineno));
        ++frames;
    }
    require(frames >= 2, ErrorCode::Parse, path + ": fewer than 2 frames");
    try {
        return SkeletonSequence(kShrecJoints, 3, std::move(coords));
    } catch (const Error& e) {
        fail(ErrorCode::Parse, path + ": " + e.what());
    }
}

ShrecSplits parse_shrec(const std::string& root, int label_mode) {
    require(label_mode == 14 || label_mode == 28, ErrorCode::InvalidArgument,
            "SHREC label mode must be 14 or 28, got " + std::to_string(label_mode));
    require(std::filesystem::is_directory(root), ErrorCode::Io, "SHREC root is not a directory: " + root);
    const std::string train_index = root + "/train_gestures.txt";
    const std::string test_index = root + "/test_gestures.txt";
    const auto train_rows = read_index(train_index);
    const auto test_rows = read_index(test_index);

    // Dense re-indexing over the labels that occur in either split.
    std::map<int, std::string> names;
    auto label_of = [&](const IndexRow& r) { return label_mode == 14 ? r.label14 : r.label28; };
    for (const auto* rows : {&train_rows, &test_rows}) {
        for (const auto& r : *rows) {
            std::string name = kGestureNames[static_cast<std::size_t>(r.gesture - 1)];
            if (label_mode == 28) name += r.finger == 1 ? " (1 finger)" : " (2 fingers)";
            names.emplace(label_of(r), name);
        }
    }
    std::map<int, int> dense;
    std::vector<std::string> label_names;
    for (const auto& [raw, name] : names) {
        dense[raw] = static_cast<int>(label_names.size());
        label_names.push_back(name);
    }

    auto load_split = [&](const std::vector<IndexRow>& rows, const std::string& index_path) {
        CanonicalDataset ds;
        ds.label_names = label_names;
        ds.num_joints = kShrecJoints;
        ds.coord_dim = 3;
        for (const auto& r : rows) {
            LabeledSequence s;
            s.sequence = parse_shrec_skeleton_file(sample_dir(root, r) + "/skeletons_world.txt");
            require(r.size <= 0 || static_cast<std::size_t>(r.size) == s.sequence.num_frames(), ErrorCode::Parse,
                    where(index_path, r.line) + ": index says " + std::to_string(r.size) +
                        " frames, skeleton file has " + std::to_string(s.sequence.num_frames()));
            s.label = dense.at(label_of(r));
            s.id = sample_id(r);
            ds.samples.push_back(std::move(s));
        }
        return ds;
    };
    ShrecSplits out{load_split(train_rows, train_index), load_split(test_rows, test_index)};
    require(!out.train.samples.empty(), ErrorCode::Parse, train_index + ": no samples");
    return out;
}

}  // namespace ddnet
