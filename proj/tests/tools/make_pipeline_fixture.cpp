// Re-records tests/fixtures/pipeline/envelope.replay.jsonl from canned answers.
// The answers stand in for a chat model; the recorded file is what replay mode reads.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "ppgpt/common/error.hpp"
#include "ppgpt/pipeline/pipeline.hpp"

using namespace ppgpt;

namespace {

bool has(const std::string& s, const char* needle) { return s.find(needle) != std::string::npos; }

const char* kRuleFirst = R"(Here is a rule for addEnvelope modeled on the reference:

```
rule addEnvelopeKeepsFirstCreator() {
    string memory envelopeID = "e1";
    uint256[] memory tokenIDs = new uint256[](1);
    tokenIDs[0] = 7;
    address $creatorBefore = idToRecords[envelopeID].owner;
    addEnvelope(envelopeID, 0x01, 8, address(0x2), tokenIDs);
    assert($creatorBefore == address(0) && idToRecords[envelopeID].owner == msg.sender);
}
```)";

const char* kRuleNoCall = R"(```
rule addEnvelopeKeepsFirstCreator() {
    string memory envelopeID = "e1";
    address $creatorBefore = idToEnvelopes[envelopeID].creator;
    assert($creatorBefore == address(0) || idToEnvelopes[envelopeID].creator == $creatorBefore);
}
```)";

const char* kRuleFinal = R"(rule checkAddEnvelopeCorrectSenderAndCreator() {
    assume(msg.sender == 0x0000000000000000000000000000000000000001);
    string memory envelopeID = "uniqueID";
    bytes32 hashedMerkleRoot = 0x1234567890abcdef1234567890abcdef1234567890abcdef1234567890abcdef;
    uint32 bitarraySize = 128;
    address erc721ContractAddress = 0x0000000000000000000000000000000000000002;
    uint256[] memory tokenIDs = new uint256[](1);
    tokenIDs[0] = 12345;

    MerkleEnvelopeERC721 storage $envelopeBefore = idToEnvelopes[envelopeID];
    bool $existsBefore = ($envelopeBefore.creator != address(0));

    addEnvelope(envelopeID, hashedMerkleRoot, bitarraySize, erc721ContractAddress, tokenIDs);

    MerkleEnvelopeERC721 storage $envelopeAfter = idToEnvelopes[envelopeID];
    bool $correctlyAdded = ($envelopeAfter.creator == msg.sender);
    bool $notExistsBefore = ! $existsBefore;

    assert($correctlyAdded && $notExistsBefore);
})";

const char* kCondition = R"(```
function addEnvelope(string envelopeID, bytes32 hashedMerkleRoot, uint32 bitarraySize, address erc721ContractAddress, uint256[] tokenIDs) precondition {
    tokenIDs.length > 0;
} postcondition {
    idToEnvelopes[envelopeID].creator == msg.sender;
    idToEnvelopes[envelopeID].tokenAddress == erc721ContractAddress;
}
```)";

class CannedModel : public gen::LLMProvider {
 public:
  std::string complete(const std::string& p, const gen::LLMParams&) override {
    if (p.rfind("Describe", 0) == 0) {
      if (has(p, "smart contract code"))
        return "Stores an envelope under a caller-chosen string id with the caller as creator, a merkle root, a claim "
               "bitmap sized from the bitarray size, an ERC721 contract and token ids. It rejects an empty token list "
               "and writes into whatever envelope already sits under that id.";
      if (has(p, "checkAddEnvelopeCorrectSenderAndCreator"))
        return "Adding an envelope must not overwrite an existing one: no creator is stored under the id beforehand, "
               "and afterwards the caller is the creator.";
      if (has(p, "precondition"))
        return "After an envelope is added, its creator is the caller and its token address is the one passed in.";
      throw ProviderError("no canned summary for prompt");
    }
    if (p.rfind("You write PSL rules", 0) == 0) return kRuleFirst;
    if (p.rfind("You write PSL function specifications", 0) == 0) return kCondition;
    if (p.rfind("The following rule does not compile", 0) == 0) return kRuleNoCall;
    if (p.rfind("Reference rule to learn from", 0) == 0) return kRuleFinal;
    throw ProviderError("no canned answer for prompt");
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_pipeline_fixture <fixture dir> <output replay file>\n";
    return 1;
  }
  std::string dir = argv[1], outp = argv[2];
  try {
    auto c = pipeline::load_config(dir + "/pipeline.conf");
    c.gen_workers = 1;  // keeps the recorded file in a fixed order
    std::filesystem::remove(outp);
    pipeline::Providers pv;
    pv.llm = std::make_shared<gen::RecordingProvider>(std::make_shared<CannedModel>(), outp);
    pipeline::RunOptions o;
    o.verify = false;
    auto r = pipeline::run_pipeline(c, dir + "/envelope.msol", "addEnvelope", pv, o);
    std::cout << pipeline::report_summary(r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
