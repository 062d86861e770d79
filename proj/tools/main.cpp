#include <string>
#include <vector>

#include "linnetcox/cli.hpp"

int main(int argc, char** argv) {
    return linnet::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
