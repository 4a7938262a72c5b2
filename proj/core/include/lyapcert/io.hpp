#pragma once

// JSON exchange formats for method descriptions and certificates.

#include "lyapcert/certify.hpp"

#include <optional>
#include <string>

namespace lyapcert::io {

/// {"n","m","A","B","C","D","classes":[{"sigma","beta"}]}; beta may be the
/// string "inf". Throws InputError on malformed input.
MethodRepresentation parse_method(const std::string& text);
std::string method_to_json(const MethodRepresentation& rep);

struct CertificateFile {
  certify::LyapunovCertificate certificate;
  /// Optional "preset" entry naming the lower bounds the certificate was
  /// synthesized against.
  std::optional<certify::Preset> preset;
};

CertificateFile parse_certificate(const std::string& text, const MethodRepresentation& rep);
std::string certificate_to_json(const certify::LyapunovCertificate& cert,
                                const std::optional<certify::Preset>& preset = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace lyapcert::io
