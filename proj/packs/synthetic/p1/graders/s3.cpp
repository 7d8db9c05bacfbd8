#include <cstdio>
int main(int argc, char** argv) {
    if (argc < 3) { std::puts("0"); return 0; }
    FILE* fin = std::fopen(argv[1], "rb");
    FILE* fout = std::fopen(argv[2], "rb");
    if (!fin || !fout) { std::puts("0"); return 0; }
    long long a, b;
    if (std::fscanf(fin, "%lld %lld", &a, &b) != 2) { std::puts("0"); return 0; }
    long long got;
    if (std::fscanf(fout, "%lld", &got) != 1) { std::puts("0"); return 0; }
    std::puts(got == a + b ? "1" : "0");
    return 0;
}
