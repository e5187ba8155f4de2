/** Pure HTML renderers.
 *
 * Every function maps (state, now) to a string with no DOM access, so
 * tests can compare whole renders for equality. main.ts injects the
 * output into fixed mount points once per tick.
 */

import { AppState, myAutobids } from "./state.js";
import { renderCountdown } from "./time.js";
import { AuctionSummary } from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function countdownCell(auction: AuctionSummary, now: number): string {
  const view = renderCountdown(auction.close_time, now);
  if (auction.state === "closed" || view.closed) {
    return `<span class="countdown closed">CLOSED</span>`;
  }
  const cls = view.finalMinute ? "countdown final-minute" : "countdown";
  return `<span class="${cls}">${view.text}</span>`;
}

export function renderBanner(state: AppState): string {
  if (!state.banner) return "";
  const retry = state.banner.retry
    ? ` <button type="button" data-action="retry">retry</button>`
    : "";
  return (
    `<div class="banner ${state.banner.tone}">` +
    escapeHtml(state.banner.text) +
    retry +
    `<button type="button" data-action="dismiss-banner">×</button></div>`
  );
}

export function renderAuctionList(state: AppState, now: number): string {
  if (state.order.length === 0) {
    return `<p class="empty">no auctions yet</p>`;
  }
  const rows = state.order
    .map((id) => state.auctions[id])
    .filter((a): a is AuctionSummary => a !== undefined)
    .map((a) => {
      const current =
        a.current_bid === null ? "&ndash;" : String(a.current_bid);
      const selected = state.selected === a.id ? " selected" : "";
      const extended = state.extended[a.id]
        ? ` <span class="badge extended">extended</span>`
        : "";
      return (
        `<tr class="auction${selected}" data-auction="${escapeHtml(a.id)}">` +
        `<td>${escapeHtml(a.item_name)}${extended}</td>` +
        `<td>${escapeHtml(a.category)}</td>` +
        `<td class="amount">${current}</td>` +
        `<td class="amount">${a.num_bids}</td>` +
        `<td>${countdownCell(a, now)}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="auctions"><thead><tr>` +
    `<th>item</th><th>category</th><th>current</th><th>bids</th><th>closes in</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function renderAdvice(state: AppState): string {
  const advice = state.advice;
  if (advice.loading) return `<p class="advice">asking the advisor…</p>`;
  if (advice.refusal) {
    return `<p class="advice refused">advisor declined: ${escapeHtml(advice.refusal)}</p>`;
  }
  if (advice.view) {
    const v = advice.view;
    const verdict = v.should_bid ? "worth bidding" : "advises against bidding";
    return (
      `<dl class="advice">` +
      `<dt>verdict</dt><dd>${verdict}</dd>` +
      `<dt>recommended bid</dt><dd>${v.recommended_bid}</dd>` +
      `<dt>bid at</dt><dd>${v.recommended_bid_time}</dd>` +
      `<dt>sample size</dt><dd>${v.sample_size}</dd></dl>`
    );
  }
  return `<button type="button" data-action="advice">get advice</button>`;
}

export function renderDetail(state: AppState, now: number): string {
  const id = state.selected;
  const auction = id ? state.auctions[id] : undefined;
  if (!auction) return `<p class="empty">select an auction</p>`;
  const prefill = state.prefill[auction.id];
  const bidValue = prefill !== undefined ? ` value="${prefill}"` : "";
  const closed = auction.state === "closed";
  const holder =
    auction.current_bidder === null
      ? "no bids yet"
      : `${escapeHtml(auction.current_bidder)} holds at ${auction.current_bid}`;
  const outcome = closed
    ? auction.winner === null
      ? `<p class="outcome">closed with no winner</p>`
      : `<p class="outcome">won by ${escapeHtml(auction.winner)} at ${auction.winning_amount}</p>`
    : "";
  const forms = closed
    ? ""
    : `<form data-form="bid" data-auction="${escapeHtml(auction.id)}">` +
      `<label>bid <input name="amount" type="number" min="${auction.required_minimum}"${bidValue}></label>` +
      `<button type="submit">place bid</button>` +
      `<span class="hint">minimum ${auction.required_minimum}</span></form>` +
      `<form data-form="autobid" data-auction="${escapeHtml(auction.id)}">` +
      `<label>auto-bid up to <input name="max" type="number"></label>` +
      `<button type="submit">engage proxy</button></form>`;
  return (
    `<section class="detail">` +
    `<h2>${escapeHtml(auction.item_name)}</h2>` +
    `<p>${escapeHtml(auction.category)} · seller ${escapeHtml(auction.seller)}</p>` +
    `<p>start ${auction.start_price}, increment ${auction.increment}</p>` +
    `<p>${holder} · ${auction.num_bids} bids</p>` +
    `<p>closes: ${countdownCell(auction, now)}</p>` +
    outcome +
    forms +
    renderAdvice(state) +
    `</section>`
  );
}

export function renderAutobids(state: AppState): string {
  const mine = myAutobids(state);
  if (mine.length === 0) return `<p class="empty">no auto-bids</p>`;
  const rows = mine
    .map((a) => {
      const auction = state.auctions[a.auction_id];
      const item = auction ? escapeHtml(auction.item_name) : escapeHtml(a.auction_id);
      // at-max offers exactly two choices: raise the cap or cancel
      const prompt =
        state.atMaxPrompt === a.autobid_id
          ? `<div class="at-max-prompt" data-autobid="${escapeHtml(a.autobid_id)}">` +
            `<span>proxy reached its maximum</span>` +
            `<form data-form="raise" data-autobid="${escapeHtml(a.autobid_id)}">` +
            `<input name="max" type="number"><button type="submit">raise maximum</button></form>` +
            `<button type="button" data-action="cancel-autobid" data-autobid="${escapeHtml(a.autobid_id)}">cancel auto-bid</button>` +
            `</div>`
          : "";
      return (
        `<li class="autobid ${a.status}">` +
        `${item}: up to ${a.max_amount} <span class="status">${a.status}</span>` +
        prompt +
        `</li>`
      );
    })
    .join("");
  return `<ul class="autobids">${rows}</ul>`;
}

export function renderReports(state: AppState): string {
  const form =
    `<form data-form="reports"><label>item ` +
    `<input name="item" value="${escapeHtml(state.reports.item)}"></label>` +
    `<button type="submit">look up</button></form>`;
  if (state.reports.empty) {
    return form + `<p class="empty">${escapeHtml(state.reports.empty)}</p>`;
  }
  let body = "";
  if (state.reports.stats) {
    const s = state.reports.stats;
    body +=
      `<dl class="stats"><dt>sample size</dt><dd>${s.sample_size}</dd>` +
      `<dt>minimum</dt><dd>${s.min}</dd>` +
      `<dt>maximum</dt><dd>${s.max}</dd>` +
      `<dt>median</dt><dd>${s.median}</dd>` +
      `<dt>quantity sold</dt><dd>${s.quantity_sold}</dd></dl>`;
  }
  if (state.reports.prediction) {
    const p = state.reports.prediction;
    body +=
      `<dl class="prediction"><dt>past</dt><dd>${p.past}</dd>` +
      `<dt>present</dt><dd>${p.present}</dd>` +
      `<dt>variant 1</dt><dd>${p.variant1}</dd>` +
      `<dt>variant 2</dt><dd>${p.variant2}</dd>` +
      `<dt>future</dt><dd>${p.future}</dd>` +
      `<dt>seed</dt><dd>${p.seed}</dd></dl>`;
  }
  return form + body;
}

/** The full dynamic region, one string per tick. */
export function renderApp(state: AppState, now: number): string {
  if (!state.session) {
    return (
      `<section class="login"><h1>auction floor</h1>` +
      `<form data-form="login"><label>name <input name="name"></label>` +
      `<button type="submit">enter</button></form>` +
      renderBanner(state) +
      `</section>`
    );
  }
  return (
    renderBanner(state) +
    `<main><section class="list">` +
    renderAuctionList(state, now) +
    `</section>` +
    renderDetail(state, now) +
    `<aside><h3>my auto-bids</h3>` +
    renderAutobids(state) +
    `<h3>reports</h3>` +
    renderReports(state) +
    `</aside></main>`
  );
}
