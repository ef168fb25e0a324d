#include "finex/codec.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "finex/error.hpp"

namespace finex::codec {

namespace {

Image from_mat(const cv::Mat& mat) {
  cv::Mat m = mat;
  if (m.depth() != CV_8U) {
    m.convertTo(m, CV_8U, m.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
  }
  if (m.channels() == 4) {
    cv::Mat bgr(m.rows, m.cols, CV_8UC3);
    int from_to[] = {0, 0, 1, 1, 2, 2};
    cv::mixChannels(&m, 1, &bgr, 1, from_to, 3);
    m = bgr;
  }
  const int ch = m.channels();
  if (ch != 1 && ch != 3) throw IngestionError("unsupported channel layout");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(m.rows) * m.cols * ch);
  for (int y = 0; y < m.rows; ++y) {
    const auto* src = m.ptr<std::uint8_t>(y);
    auto* dst = px.data() + static_cast<std::size_t>(y) * m.cols * ch;
    if (ch == 1) {
      std::copy_n(src, m.cols, dst);
    } else {
      for (int x = 0; x < m.cols; ++x) {  // BGR -> RGB
        dst[3 * x] = src[3 * x + 2];
        dst[3 * x + 1] = src[3 * x + 1];
        dst[3 * x + 2] = src[3 * x];
      }
    }
  }
  return Image(m.cols, m.rows, ch, std::move(px));
}

cv::Mat to_mat(const Image& img) {
  const int type = img.channels() == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat m(img.height(), img.width(), type);
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto* dst = m.ptr<std::uint8_t>(y);
    if (img.channels() == 1) {
      std::copy(src.begin(), src.end(), dst);
    } else {
      for (int x = 0; x < img.width(); ++x) {
        dst[3 * x] = src[3 * x + 2];
        dst[3 * x + 1] = src[3 * x + 1];
        dst[3 * x + 2] = src[3 * x];
      }
    }
  }
  return m;
}

std::string lower_ext(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

bool is_image_file(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" ||
         ext == ".tiff";
}

std::vector<Image> read_pages(const std::filesystem::path& path) {
  std::vector<Image> pages;
  const auto ext = lower_ext(path);
  try {
    if (ext == ".tif" || ext == ".tiff") {
      std::vector<cv::Mat> mats;
      if (!cv::imreadmulti(path.string(), mats, cv::IMREAD_ANYCOLOR | cv::IMREAD_ANYDEPTH)) {
        throw IngestionError("cannot read image file: " + path.string());
      }
      for (const auto& m : mats) pages.push_back(from_mat(m));
    } else {
      cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYCOLOR | cv::IMREAD_ANYDEPTH);
      if (m.empty()) throw IngestionError("cannot read image file: " + path.string());
      pages.push_back(from_mat(m));
    }
  } catch (const cv::Exception& e) {
    throw IngestionError("cannot read image file: " + path.string() + " (" + e.what() + ")");
  }
  return pages;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_mat(img), buf)) throw Error("png encoding failed");
  return buf;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m;
  try {
    m = cv::imdecode(raw, cv::IMREAD_ANYCOLOR);
  } catch (const cv::Exception&) {
  }
  if (m.empty()) throw ProtocolError("payload is not a decodable image");
  return from_mat(m);
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (!cv::imwrite(path.string(), to_mat(img))) {
    throw Error("cannot write image: " + path.string());
  }
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 payload has truncated length");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ProtocolError("malformed base64 payload");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding as zero bytes
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace finex::codec
