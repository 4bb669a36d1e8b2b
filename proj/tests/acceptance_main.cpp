// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 kppfront authors

int main() { return 0; }
