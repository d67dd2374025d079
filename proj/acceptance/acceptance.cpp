#include <nchar/verify.hpp>

#include <iostream>

int main()
{
    using namespace nchar::verify;
    int failed = 0;
    for (const auto& c : criteria()) {
        auto r = run_criterion(c, 20240601);
        std::cout << format_report(r) << std::endl;
        if (!r.pass()) ++failed;
    }
    std::cout << (criteria().size() - failed) << "/" << criteria().size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
