#include "sectorrank/io.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sectorrank/error.hpp"

namespace sectorrank {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Io: return "Io";
  case ErrorKind::MalformedRow: return "MalformedRow";
  case ErrorKind::EmptyField: return "EmptyField";
  case ErrorKind::DuplicatePair: return "DuplicatePair";
  case ErrorKind::JsonSyntax: return "JsonSyntax";
  case ErrorKind::BadHeader: return "BadHeader";
  case ErrorKind::UnknownSector: return "UnknownSector";
  case ErrorKind::DuplicateId: return "DuplicateId";
  case ErrorKind::DateYearMismatch: return "DateYearMismatch";
  case ErrorKind::InvalidDate: return "InvalidDate";
  case ErrorKind::InvalidSplit: return "InvalidSplit";
  case ErrorKind::DimensionMismatch: return "DimensionMismatch";
  case ErrorKind::NonFiniteValue: return "NonFiniteValue";
  case ErrorKind::ZeroNorm: return "ZeroNorm";
  case ErrorKind::MissingSectorVector: return "MissingSectorVector";
  case ErrorKind::MissingVector: return "MissingVector";
  case ErrorKind::EmptyBatch: return "EmptyBatch";
  case ErrorKind::TrainingDiverged: return "TrainingDiverged";
  case ErrorKind::InvalidConfig: return "InvalidConfig";
  case ErrorKind::MissingPrediction: return "MissingPrediction";
  case ErrorKind::UnknownSegment: return "UnknownSegment";
  case ErrorKind::NonPositivePrice: return "NonPositivePrice";
  case ErrorKind::DuplicateEntry: return "DuplicateEntry";
  case ErrorKind::UnknownCompany: return "UnknownCompany";
  case ErrorKind::NoLaterDate: return "NoLaterDate";
  case ErrorKind::NoUsableCompanies: return "NoUsableCompanies";
  case ErrorKind::MixedDates: return "MixedDates";
  case ErrorKind::DuplicateSector: return "DuplicateSector";
  case ErrorKind::NoSegments: return "NoSegments";
  case ErrorKind::SingleClass: return "SingleClass";
  case ErrorKind::Diverged: return "Diverged";
  case ErrorKind::NoPairs: return "NoPairs";
  case ErrorKind::SectorSetMismatch: return "SectorSetMismatch";
  case ErrorKind::BadModel: return "BadModel";
  case ErrorKind::EmptyTranscript: return "EmptyTranscript";
  case ErrorKind::EmptyExcerpt: return "EmptyExcerpt";
  case ErrorKind::NotJson: return "NotJson";
  case ErrorKind::WrongShape: return "WrongShape";
  case ErrorKind::NotANumber: return "NotANumber";
  case ErrorKind::OutOfRange: return "OutOfRange";
  case ErrorKind::Transport: return "Transport";
  case ErrorKind::HttpStatus: return "HttpStatus";
  case ErrorKind::AuthMissing: return "AuthMissing";
  case ErrorKind::Timeout: return "Timeout";
  }
  return "Unknown";
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename onto " + path.string() + ": " + ec.message());
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string normalize_name(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorKind::Io, "ICU NFC normalizer unavailable");

  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  if (text.indexOf(static_cast<UChar>(0xFFFD)) >= 0 &&
      raw.find("\xEF\xBF\xBD") == std::string_view::npos) {
    throw Error(ErrorKind::MalformedRow, "invalid UTF-8 in '" + std::string(raw) + "'");
  }
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw Error(ErrorKind::MalformedRow, "NFC normalization failed");

  int32_t begin = 0;
  int32_t end = normalized.length();
  while (begin < end && u_isUWhiteSpace(normalized.char32At(begin))) {
    begin = normalized.moveIndex32(begin, 1);
  }
  while (end > begin) {
    const int32_t prev = normalized.moveIndex32(end, -1);
    if (!u_isUWhiteSpace(normalized.char32At(prev))) break;
    end = prev;
  }
  std::string out;
  normalized.tempSubStringBetween(begin, end).toUTF8String(out);
  return out;
}

} // namespace sectorrank
