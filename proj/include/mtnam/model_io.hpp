#pragma once

#include "mtnam/mtnam.hpp"
#include "mtnam/nam.hpp"

#include <filesystem>
#include <string>

namespace mtnam {

/// Line-oriented model files, format version 1. Every file starts with
/// optional "# ..." comment lines, then "mtnam-model 1" and "kind <k>".
/// Reals are written with 17 significant digits.
inline constexpr int kModelFormatVersion = 1;

void save_nam(const std::filesystem::path& path, const NamModel& m, const std::string& header_comment = {});
NamModel load_nam(const std::filesystem::path& path);

void save_mtnam(const std::filesystem::path& path, const MtNamModel& m, const std::string& header_comment = {});
MtNamModel load_mtnam(const std::filesystem::path& path);

void save_lr(const std::filesystem::path& path, const LrModel& m, const std::string& header_comment = {});
LrModel load_lr(const std::filesystem::path& path);

void save_dnn(const std::filesystem::path& path, const DnnModel& m, const std::string& header_comment = {});
DnnModel load_dnn(const std::filesystem::path& path);

std::string nam_to_string(const NamModel& m);
std::string mtnam_to_string(const MtNamModel& m);

/// Value of "key=value" in the first "# ..." line that carries it, or "".
std::string read_header_value(const std::filesystem::path& path, const std::string& key);

}  // namespace mtnam
