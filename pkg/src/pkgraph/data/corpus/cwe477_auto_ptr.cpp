#include <memory>

void legacy_hold(char* raw) {
    std::auto_ptr<char>(raw);
}

void main() {
    char* raw = (char*)malloc(16);
    legacy_hold(raw);
}
