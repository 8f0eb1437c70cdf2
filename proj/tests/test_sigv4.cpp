// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "pulse/sha256.hpp"
#include "pulse/sigv4.hpp"

using pulse::SigV4Credentials;
using pulse::SigV4Request;

namespace {

constexpr const char* kEmptyPayloadHash =
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

const SigV4Credentials kTestCredentials{
    "AKIDEXAMPLE",
    "wJalrXUtnFEMI/K7MDENG+bPxRfiCYEXAMPLEKEY",
};

SigV4Request vanilla_get() {
    SigV4Request r;
    r.method = "GET";
    r.path = "/";
    r.headers = {{"host", "example.amazonaws.com"}, {"x-amz-date", "20150830T123600Z"}};
    r.payload_hash = kEmptyPayloadHash;
    r.amz_date = "20150830T123600Z";
    return r;
}

}  // namespace

TEST_CASE("canonical request matches the reference get-vanilla bytes") {
    const std::string canonical = pulse::sigv4_canonical_request(vanilla_get());
    CHECK(canonical ==
          "GET\n/\n\nhost:example.amazonaws.com\nx-amz-date:20150830T123600Z\n\n"
          "host;x-amz-date\n"
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(pulse::Sha256::digest(canonical).hex() ==
          "bb579772317eb040ac9ed261061d46c1f17a8133879d6129b6e1c25292927e63");
}

TEST_CASE("get-vanilla signs to the published signature") {
    const SigV4Request r = vanilla_get();

    CHECK(pulse::sigv4_string_to_sign(r, "us-east-1", "service") ==
          "AWS4-HMAC-SHA256\n"
          "20150830T123600Z\n"
          "20150830/us-east-1/service/aws4_request\n"
          "bb579772317eb040ac9ed261061d46c1f17a8133879d6129b6e1c25292927e63");
    CHECK(pulse::sigv4_signature(r, kTestCredentials, "us-east-1", "service") ==
          "5fa00fa31553b73ebf1942676e86291e8372ff2a2260956d9b8aae1d763fbf31");
    CHECK(pulse::sigv4_authorization_header(r, kTestCredentials, "us-east-1", "service") ==
          "AWS4-HMAC-SHA256 Credential=AKIDEXAMPLE/20150830/us-east-1/service/aws4_request, "
          "SignedHeaders=host;x-amz-date, "
          "Signature=5fa00fa31553b73ebf1942676e86291e8372ff2a2260956d9b8aae1d763fbf31");
}

TEST_CASE("query-bearing request signs to the published IAM signature") {
    SigV4Request r;
    r.method = "GET";
    r.path = "/";
    r.query = {{"Action", "ListUsers"}, {"Version", "2010-05-08"}};
    r.headers = {{"host", "iam.amazonaws.com"},
                 {"content-type", "application/x-www-form-urlencoded; charset=utf-8"},
                 {"x-amz-date", "20150830T123600Z"}};
    r.payload_hash = kEmptyPayloadHash;
    r.amz_date = "20150830T123600Z";

    const std::string canonical = pulse::sigv4_canonical_request(r);
    CHECK(pulse::Sha256::digest(canonical).hex() ==
          "f536975d06c0309214f805bb90ccff089219ecd68b2577efef23edd43b7e1a59");
    CHECK(pulse::sigv4_signature(r, kTestCredentials, "us-east-1", "iam") ==
          "5d672d79c15b13162d9279b0855cfba6789a8edb4c82c400e06b5924a6f2b5d7");
}

TEST_CASE("signing key derivation matches the published example") {
    const auto key = pulse::sigv4_signing_key("wJalrXUtnFEMI/K7MDENG+bPxRfiCYEXAMPLEKEY",
                                              "20120215", "us-east-1", "iam");
    std::string hex;
    for (const auto b : key) {
        hex.push_back("0123456789abcdef"[b >> 4]);
        hex.push_back("0123456789abcdef"[b & 0xF]);
    }
    CHECK(hex == "f4780e2d9f65fa895f9c67b32ce1baf0b0d8a43505a000a1a9e090d414db404d");
}

TEST_CASE("uri encoding follows the unreserved-character rules") {
    CHECK(pulse::sigv4_uri_encode("AZaz09-_.~", true) == "AZaz09-_.~");
    CHECK(pulse::sigv4_uri_encode("a b", true) == "a%20b");
    CHECK(pulse::sigv4_uri_encode("a+b*c", true) == "a%2Bb%2Ac");
    CHECK(pulse::sigv4_uri_encode("checkpoints/51/delta.pulp", false) ==
          "checkpoints/51/delta.pulp");
    CHECK(pulse::sigv4_uri_encode("checkpoints/51", true) == "checkpoints%2F51");
    CHECK(pulse::sigv4_uri_encode("\xE2\x82\xAC", true) == "%E2%82%AC");  // multibyte UTF-8
}

TEST_CASE("canonical query sorts by name then value and encodes both") {
    CHECK(pulse::sigv4_canonical_query({{"b", "2"}, {"a", "1"}}) == "a=1&b=2");
    CHECK(pulse::sigv4_canonical_query({{"k", "b"}, {"k", "a"}}) == "k=a&k=b");
    CHECK(pulse::sigv4_canonical_query({{"prefix", "checkpoints/"}, {"list-type", "2"}}) ==
          "list-type=2&prefix=checkpoints%2F");
    CHECK(pulse::sigv4_canonical_query({{"marker", ""}}) == "marker=");
    CHECK(pulse::sigv4_canonical_query({}).empty());
}

TEST_CASE("header canonicalization lowercases, trims, and sorts") {
    SigV4Request r = vanilla_get();
    r.headers = {{"X-Amz-Date", "20150830T123600Z"},
                 {"Host", "  example.amazonaws.com  "},
                 {"My-Header", "a   b   c"}};
    const std::string canonical = pulse::sigv4_canonical_request(r);
    CHECK(canonical.find("host:example.amazonaws.com\n") != std::string::npos);
    CHECK(canonical.find("my-header:a b c\n") != std::string::npos);
    CHECK(pulse::sigv4_signed_headers(r) == "host;my-header;x-amz-date");
}

TEST_CASE("signatures depend on every scoped input") {
    const SigV4Request base = vanilla_get();
    const std::string sig = pulse::sigv4_signature(base, kTestCredentials, "us-east-1", "service");

    SigV4Request r = base;
    r.payload_hash = pulse::Sha256::digest(std::string_view("body")).hex();
    CHECK(pulse::sigv4_signature(r, kTestCredentials, "us-east-1", "service") != sig);

    CHECK(pulse::sigv4_signature(base, kTestCredentials, "eu-west-1", "service") != sig);
    CHECK(pulse::sigv4_signature(base, kTestCredentials, "us-east-1", "s3") != sig);

    SigV4Credentials other = kTestCredentials;
    other.secret_access_key += "x";
    CHECK(pulse::sigv4_signature(base, other, "us-east-1", "service") != sig);

    CHECK_THROWS_AS(pulse::sigv4_scope("2015", "us-east-1", "s3"), pulse::ArgumentError);
}
