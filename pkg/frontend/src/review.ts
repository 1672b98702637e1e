/** Single-page review editor: anchored sections with three editable moves,
 * charts adjacent to the sections they explain, co-located controls, and
 * the approve/export flow. Edits apply optimistically and roll forward; a
 * StaleEdit reply reloads the section and surfaces a non-blocking notice. */

import { ApiRequestError, ReviewApi } from "./api.js";
import { badgeFor } from "./badges.js";
import { renderChart } from "./charts.js";
import { approveEnabled, unmetControl } from "./gating.js";
import type {
  ChartSpec,
  FollowUpInterval,
  MoveTag,
  ReviewPayload,
} from "./types.js";
import { MOVE_TAGS } from "./types.js";

const FOLLOW_UP_OPTIONS: { value: FollowUpInterval; label: string }[] = [
  { value: "none_selected", label: "Select follow-up…" },
  { value: "1_week", label: "1 week" },
  { value: "2_weeks", label: "2 weeks" },
  { value: "1_month", label: "1 month" },
  { value: "3_months", label: "3 months" },
];

export interface ReviewController {
  readonly root: HTMLElement;
  refreshGate(): void;
}

function moveLabel(tag: MoveTag): string {
  return tag.replace(/_/g, " ");
}

export async function renderReview(
  root: HTMLElement,
  api: ReviewApi,
  caseId: string,
): Promise<ReviewController> {
  let payload = await api.review(caseId);
  if (!payload.session) {
    await api.openSession(caseId);
    payload = await api.review(caseId);
  }
  return buildReview(root, api, payload);
}

/** Build the editor DOM from a loaded payload (exported for tests). */
export function buildReview(
  root: HTMLElement,
  api: ReviewApi,
  payload: ReviewPayload,
): ReviewController {
  root.replaceChildren();
  const caseId = payload.case_id;
  const chartsById = new Map<string, ChartSpec>(
    payload.charts.map((c) => [c.chart_id, c]),
  );
  // Last text the server confirmed, per section/move: the optimistic base.
  const serverText = new Map<string, string>();
  const keyOf = (sectionId: string, move: MoveTag) => `${sectionId}/${move}`;

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = `Case ${caseId}`;
  title.append(" ", badgeFor(payload.urgency));
  const notice = document.createElement("p");
  notice.className = "notice";
  notice.hidden = true;
  const nav = document.createElement("nav");
  for (const section of payload.sections) {
    const link = document.createElement("a");
    link.href = `#${section.section_id}`;
    link.textContent = section.topic.replace(/_/g, " ");
    nav.append(link);
  }
  header.append(title, nav, notice);
  root.append(header);

  const showNotice = (text: string) => {
    notice.textContent = text;
    notice.hidden = false;
  };

  const approved = payload.session?.status === "approved";
  const textareas: HTMLTextAreaElement[] = [];

  for (const section of payload.sections) {
    const container = document.createElement("section");
    container.id = section.section_id;
    container.dataset.topic = section.topic;
    const heading = document.createElement("h2");
    heading.textContent = section.topic.replace(/_/g, " ");
    container.append(heading);

    for (const tag of MOVE_TAGS) {
      const key = keyOf(section.section_id, tag);
      serverText.set(key, section.moves[tag]);

      const block = document.createElement("div");
      block.className = "move";
      const label = document.createElement("label");
      label.textContent = moveLabel(tag);
      const textarea = document.createElement("textarea");
      textarea.value = section.moves[tag];
      textarea.dataset.sectionId = section.section_id;
      textarea.dataset.move = tag;
      textarea.disabled = approved;
      textareas.push(textarea);

      textarea.addEventListener("change", () => {
        // Optimistic: the textarea already shows the new text; sync after.
        void submitEdit(section.section_id, tag, textarea);
      });
      block.append(label, textarea);
      container.append(block);
    }

    for (const statement of section.gap_statements) {
      const gap = document.createElement("p");
      gap.className = "gap";
      gap.textContent = statement;
      container.append(gap);
    }

    // Paired charts sit inside the section, siblings of its text blocks.
    for (const ref of section.chart_refs) {
      const spec = chartsById.get(ref);
      if (spec) {
        container.append(renderChart(spec));
      }
    }
    root.append(container);
  }

  async function submitEdit(
    sectionId: string,
    move: MoveTag,
    textarea: HTMLTextAreaElement,
  ): Promise<void> {
    const key = keyOf(sectionId, move);
    const expected = serverText.get(key) ?? "";
    const afterText = textarea.value;
    if (afterText === expected) {
      return;
    }
    try {
      const result = await api.submitEdit(
        caseId,
        sectionId,
        move,
        expected,
        afterText,
      );
      serverText.set(key, result.after_text);
    } catch (error) {
      if (error instanceof ApiRequestError && error.code === "StaleEdit") {
        const fresh = await api.review(caseId);
        const current = fresh.sections.find(
          (s) => s.section_id === sectionId,
        )?.moves[move];
        if (current !== undefined) {
          serverText.set(key, current);
          textarea.value = current;
        }
        showNotice(
          `The ${moveLabel(move)} text in ${sectionId} changed elsewhere;` +
            " it was reloaded. Reapply your edit if still needed.",
        );
      } else {
        showNotice(`Edit not saved: ${(error as Error).message}`);
      }
    }
  }

  // -- controls: checkbox, dropdown, approve — co-located at the end --------

  const controls = document.createElement("section");
  controls.id = "controls";
  const checkboxLabel = document.createElement("label");
  const checkbox = document.createElement("input");
  checkbox.type = "checkbox";
  checkbox.id = "confirm-medications";
  checkbox.checked = payload.session?.medications_confirmed ?? false;
  checkbox.disabled = approved;
  checkboxLabel.append(checkbox, " Medications confirmed");

  const dropdown = document.createElement("select");
  dropdown.id = "follow-up";
  for (const option of FOLLOW_UP_OPTIONS) {
    const el = document.createElement("option");
    el.value = option.value;
    el.textContent = option.label;
    dropdown.append(el);
  }
  dropdown.value = payload.session?.follow_up_interval ?? "none_selected";
  dropdown.disabled = approved;

  const approveButton = document.createElement("button");
  approveButton.id = "approve";
  approveButton.textContent = "Approve and export";

  const hint = document.createElement("span");
  hint.className = "gate-hint";

  const exportLink = document.createElement("a");
  exportLink.id = "export-link";
  exportLink.href = api.noteUrl(caseId);
  exportLink.textContent = "Open exported note";
  exportLink.hidden = !approved;

  controls.append(checkboxLabel, dropdown, approveButton, hint, exportLink);
  root.append(controls);

  function refreshGate(): void {
    const enabled =
      !approved &&
      approveEnabled(checkbox.checked, dropdown.value as FollowUpInterval);
    approveButton.disabled = !enabled;
    const missing = unmetControl(
      checkbox.checked,
      dropdown.value as FollowUpInterval,
    );
    hint.textContent =
      approved || !missing
        ? ""
        : missing === "medications_confirmed"
          ? "Confirm medications to enable approval."
          : "Select a follow-up interval to enable approval.";
  }

  function lockPage(): void {
    for (const textarea of textareas) {
      textarea.disabled = true;
    }
    checkbox.disabled = true;
    dropdown.disabled = true;
    approveButton.disabled = true;
    exportLink.hidden = false;
  }

  checkbox.addEventListener("change", () => {
    refreshGate();
    void api
      .confirmMedications(caseId, checkbox.checked)
      .catch((error) => showNotice(`Not saved: ${(error as Error).message}`));
  });
  dropdown.addEventListener("change", () => {
    refreshGate();
    void api
      .setFollowUp(caseId, dropdown.value)
      .catch((error) => showNotice(`Not saved: ${(error as Error).message}`));
  });
  approveButton.addEventListener("click", () => {
    void (async () => {
      try {
        await api.approve(caseId);
        lockPage();
        showNotice("Approved. The page is now read-only.");
      } catch (error) {
        if (error instanceof ApiRequestError) {
          hint.textContent = `Approval blocked: ${error.message}`;
        } else {
          showNotice(`Approval failed: ${(error as Error).message}`);
        }
      }
    })();
  });

  if (approved) {
    lockPage();
  }
  refreshGate();
  return { root, refreshGate };
}
