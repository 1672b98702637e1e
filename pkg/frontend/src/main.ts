/** Bootstrap: hash routing between the queue and the single-page editor,
 * with a connection-loss banner and retry. */

import { ReviewApi } from "./api.js";
import { renderQueue } from "./queue.js";
import { renderReview } from "./review.js";

const api = new ReviewApi("", "dr-demo");

function banner(root: HTMLElement, message: string, retry: () => void): void {
  root.replaceChildren();
  const box = document.createElement("div");
  box.className = "banner";
  const text = document.createElement("span");
  text.textContent = message;
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.addEventListener("click", retry);
  box.append(text, button);
  root.append(box);
}

async function route(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const hash = window.location.hash;
  const caseMatch = /^#\/case\/(.+)$/.exec(hash);
  try {
    if (caseMatch) {
      await renderReview(root, api, decodeURIComponent(caseMatch[1]));
    } else {
      const rows = await api.listCases();
      renderQueue(root, rows, (caseId) => {
        window.location.hash = `#/case/${encodeURIComponent(caseId)}`;
      });
    }
  } catch (error) {
    banner(
      root,
      `Cannot reach the review service: ${(error as Error).message}`,
      () => void route(),
    );
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
