// Classic tableau rendering: candidates as rows, constraints as ranked
// columns, one asterisk per violation mark, a pointing hand on the credited
// winner and a badge on every co-winner.

import { TableauData } from "./api.js";
import { el } from "./dom.js";

export const CREDITED_MARKER = "☞"; // ☞

export function renderTableau(view: TableauData): HTMLTableElement {
    const table = el("table", { class: "tableau" });
    const head = el("tr", {}, [el("th", { class: "tableau-corner" }, ["candidate"])]);
    for (const constraint of view.constraints) {
        head.append(el("th", { class: "tableau-constraint" }, [constraint]));
    }
    table.append(el("thead", {}, [head]));

    const body = el("tbody");
    for (const row of view.rows) {
        const tr = el("tr", {
            class: row.credited ? "tableau-row credited" : "tableau-row",
            "data-scf": row.scf,
        });
        const badge = row.winner && !row.credited
            ? [el("span", { class: "cowinner-badge", title: "co-winner" }, ["="])]
            : [];
        tr.append(el("td", { class: "tableau-candidate" }, [
            el("span", { class: "credited-marker" }, [row.credited ? CREDITED_MARKER : ""]),
            ...badge,
            el("span", { class: "candidate-label" }, [row.scf]),
        ]));
        for (const marks of row.marks) {
            tr.append(el("td", { class: "tableau-marks" }, ["*".repeat(marks)]));
        }
        body.append(tr);
    }
    table.append(body);
    return table;
}
