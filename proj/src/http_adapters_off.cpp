#include "http_adapters.hpp"

namespace tickbench::backends {

std::unique_ptr<Backend> make_http_backend(const BackendDescriptor&) { return nullptr; }

}  // namespace tickbench::backends
