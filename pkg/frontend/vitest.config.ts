import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        environment: "happy-dom",
        // The UI is served same-origin by the review service; the e2e test
        // talks to a live server on a random port, so skip CORS there.
        environmentOptions: {
            happyDOM: {
                settings: { fetch: { disableSameOriginPolicy: true } },
            },
        },
        testTimeout: 90_000,
        hookTimeout: 90_000,
    },
});
