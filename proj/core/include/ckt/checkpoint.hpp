#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ckt/tensor.hpp"

namespace ckt {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct Checkpoint {
    std::string metadata_json;  // model/config echo, schema owned by the caller
    std::vector<NamedTensor> entries;

    const Tensor& find(const std::string& name) const;
};

/// Binary checkpoint, format CKTC v1: named double arrays with shapes plus a
/// metadata JSON blob. Round trips are bit-exact. Writes go through a
/// temp-file rename so readers never observe a partial file.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ckt
