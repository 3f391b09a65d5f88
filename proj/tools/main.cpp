#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    return stscnn::cli_dispatch(std::vector<std::string>(argv, argv + argc));
}
